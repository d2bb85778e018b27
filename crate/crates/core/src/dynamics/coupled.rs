use serde::{Deserialize, Serialize};

use super::intralayer::check_nonnegative;
use crate::error::{Error, Result};

/// A stack of `L` layers of width `N` whose growth rates depend on the
/// connectivities of the neighboring layers. Layer indices are `0..L`.
///
/// For layer `l`, `c_next[l][j][k]` couples node `j` to node `k` of layer
/// `l + 1` and `c_prev[l][i][j]` couples node `i` of layer `l - 1` to node
/// `j`. Couplings toward a missing neighbor are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerStackState {
    pub r: Vec<Vec<f64>>,
    pub c_right: Vec<Vec<f64>>,
    pub c_left: Vec<Vec<f64>>,
    pub c_next: Vec<Vec<Vec<f64>>>,
    pub c_prev: Vec<Vec<Vec<f64>>>,
}

impl LayerStackState {
    pub fn new(
        r: Vec<Vec<f64>>,
        c_right: Vec<Vec<f64>>,
        c_left: Vec<Vec<f64>>,
        c_next: Vec<Vec<Vec<f64>>>,
        c_prev: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let s = Self { r, c_right, c_left, c_next, c_prev };
        s.validate()?;
        Ok(s)
    }

    /// Homogeneous stack: `r = 1/N^2`, per-layer constants `c_right`,
    /// `c_left` and node-independent neighbor couplings `c_{jk} = c_k`.
    pub fn homogeneous(layers: usize, n: usize, c_right: f64, c_left: f64, c_node: &[f64]) -> Result<Self> {
        if c_node.len() != n {
            return Err(Error::Shape(format!("{} node constants for width {n}", c_node.len())));
        }
        let row = vec![c_node.to_vec(); n];
        let col: Vec<Vec<f64>> = c_node.iter().map(|&c| vec![c; n]).collect();
        Self::new(
            vec![vec![1.0 / (n * n) as f64; n]; layers],
            vec![vec![c_right; n]; layers],
            vec![vec![c_left; n]; layers],
            vec![row; layers],
            vec![col; layers],
        )
    }

    pub fn layers(&self) -> usize {
        self.r.len()
    }

    pub fn width(&self) -> usize {
        self.r.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.layers();
        let n = self.width();
        if l == 0 || n == 0 {
            return Err(Error::Shape("empty layer stack".into()));
        }
        let square = |m: &Vec<Vec<f64>>| m.len() == n && m.iter().all(|row| row.len() == n);
        let ok = self.r.iter().all(|v| v.len() == n)
            && self.c_right.len() == l
            && self.c_left.len() == l
            && self.c_next.len() == l
            && self.c_prev.len() == l
            && self.c_right.iter().chain(&self.c_left).all(|v| v.len() == n)
            && self.c_next.iter().chain(&self.c_prev).all(square);
        if !ok {
            return Err(Error::Shape(format!("coupling tensors inconsistent with {l} layers of width {n}")));
        }
        for r in &self.r {
            check_nonnegative(r)?;
        }
        let all_c = self
            .c_right
            .iter()
            .chain(&self.c_left)
            .flatten()
            .chain(self.c_next.iter().chain(&self.c_prev).flatten().flatten());
        for &c in all_c {
            if !(c > 0.0) {
                return Err(Error::Domain(format!("coupling constant {c} is not positive")));
            }
        }
        Ok(())
    }

    pub(crate) fn flatten(&self) -> Vec<f64> {
        self.r.concat()
    }

}

/// Effective growth rate of every node of layer `l` given the flat state `y`.
fn growth_rates(s: &LayerStackState, y: &[f64], l: usize, out: &mut [f64]) {
    let n = s.width();
    let layer = |k: usize| &y[k * n..(k + 1) * n];
    for (j, g) in out.iter_mut().enumerate() {
        let mut total = 0.0;
        if l + 1 < s.layers() {
            let next = layer(l + 1);
            let sum: f64 = s.c_next[l][j].iter().zip(next).map(|(c, r)| c * r.sqrt()).sum();
            total += s.c_right[l][j] * sum;
        }
        if l > 0 {
            let prev = layer(l - 1);
            let sum: f64 = (0..n).map(|i| s.c_prev[l][i][j] * prev[i].sqrt()).sum();
            total += s.c_left[l][j] * sum;
        }
        *g = total;
    }
}

fn layer_rhs(s: &LayerStackState, y: &[f64], l: usize, g: &mut [f64], out: &mut [f64]) {
    let n = s.width();
    let r = &y[l * n..(l + 1) * n];
    growth_rates(s, y, l, g);
    let total: f64 = r.iter().zip(g.iter()).map(|(ri, gi)| ri.sqrt() * gi).sum();
    for ((o, &rj), &gj) in out.iter_mut().zip(r).zip(g.iter()) {
        let sj = rj.sqrt();
        *o = rj * (1.0 - sj) * gj - rj * (total - sj * gj);
    }
}

/// Right-hand side of the whole stack at the flat state `y` (layer-major).
pub(crate) fn coupled_rhs_flat(s: &LayerStackState, y: &[f64], out: &mut [f64]) -> Result<()> {
    check_nonnegative(y)?;
    let n = s.width();
    let mut g = vec![0.0; n];
    for l in 0..s.layers() {
        layer_rhs(s, y, l, &mut g, &mut out[l * n..(l + 1) * n]);
    }
    Ok(())
}

/// `dr_j^(l)/dt` for every node of layer `l`.
pub fn coupled_rhs(stack: &LayerStackState, l: usize) -> Result<Vec<f64>> {
    if l >= stack.layers() {
        return Err(Error::Index(format!("layer {l} of {}", stack.layers())));
    }
    let y = stack.flatten();
    check_nonnegative(&y)?;
    let n = stack.width();
    let mut g = vec![0.0; n];
    let mut out = vec![0.0; n];
    layer_rhs(stack, &y, l, &mut g, &mut out);
    Ok(out)
}
