use crate::error::{Error, Result};
use crate::netcore::{Dataset, LayeredNetwork};

/// For each hidden layer, the largest number of nodes with positive
/// post-activation on any single sample.
pub fn embedding_dimension(net: &LayeredNetwork, data: &Dataset) -> Result<Vec<usize>> {
    if data.is_empty() {
        return Err(Error::Argument("embedding dimension of an empty dataset".into()));
    }
    let hidden = net.depth() - 1;
    let mut dims = vec![0usize; hidden];
    for x in data.features() {
        let z = net.pre_activations(x)?;
        for (d, layer) in dims.iter_mut().zip(&z[..hidden]) {
            *d = (*d).max(layer.iter().filter(|&&v| v > 0.0).count());
        }
    }
    Ok(dims)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcore::{init_network, BiasMode, NetworkArch, TrainConfig};

    fn data(rows: Vec<Vec<f64>>) -> Dataset {
        let n = rows.len();
        Dataset::new("t", rows, vec![0.0; n]).unwrap()
    }

    #[test]
    fn positive_net_uses_full_width() {
        let arch = NetworkArch::new(vec![2, 3, 5, 1], BiasMode::Zero).unwrap();
        let net = LayeredNetwork::layer_constant(arch, |_| 0.1);
        let d = data(vec![vec![1.0, 2.0]]);
        assert_eq!(embedding_dimension(&net, &d).unwrap(), vec![3, 5]);
    }

    #[test]
    fn negative_first_layer_silences_everything() {
        let arch = NetworkArch::new(vec![2, 3, 5, 1], BiasMode::Zero).unwrap();
        let net = LayeredNetwork::layer_constant(arch, |l| if l == 1 { -0.1 } else { 0.1 });
        let d = data(vec![vec![1.0, 2.0], vec![0.3, 0.1]]);
        assert_eq!(embedding_dimension(&net, &d).unwrap(), vec![0, 0]);
    }

    #[test]
    fn matches_recount_and_grows_with_samples() {
        let arch = NetworkArch::new(vec![3, 6, 6, 6, 1], BiasMode::Zero).unwrap();
        let cfg = TrainConfig { seed: 4, init_low: -1.0, init_high: 1.0, ..TrainConfig::default() };
        let net = init_network(&arch, &cfg).unwrap();
        let mut rng = crate::rng::stream(5, 0);
        use rand::Rng;
        let rows: Vec<Vec<f64>> = (0..30).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let mut prev = vec![0; 3];
        for m in 1..=rows.len() {
            let d = data(rows[..m].to_vec());
            let got = embedding_dimension(&net, &d).unwrap();
            // recount by explicit layer-by-layer evaluation
            let mut want = vec![0; 3];
            for x in &rows[..m] {
                let mut act = x.clone();
                for l in 1..=3 {
                    let w = net.layer(l);
                    act = (0..w.cols())
                        .map(|j| (0..w.rows()).map(|i| act[i] * w.get(i, j)).sum::<f64>().max(0.0))
                        .collect();
                    want[l - 1] = want[l - 1].max(act.iter().filter(|&&v| v > 0.0).count());
                }
            }
            assert_eq!(got, want);
            assert!(got.iter().zip(&prev).all(|(g, p)| g >= p && *g <= 6));
            prev = got;
        }
    }
}
