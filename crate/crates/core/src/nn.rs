//! Neural layers composed from tape primitives.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::error::Result;
use crate::tape::{Tape, Var};
use crate::tensor::{ParamId, ParamSet, Tensor};

/// Parameter ids of one GRU cell (update gate `z`, reset gate `r`, candidate `h`).
#[derive(Debug, Clone, Copy)]
pub struct GruParams {
    pub w_z: ParamId,
    pub w_r: ParamId,
    pub w_h: ParamId,
    pub u_z: ParamId,
    pub u_r: ParamId,
    pub u_h: ParamId,
    pub b_z: ParamId,
    pub b_r: ParamId,
    pub b_h: ParamId,
}

const GRU_SUFFIXES: [&str; 9] = ["w_z", "w_r", "w_h", "u_z", "u_r", "u_h", "b_z", "b_r", "b_h"];

impl GruParams {
    /// Registers a freshly initialized GRU weight set under `prefix`.
    pub fn init(params: &mut ParamSet, prefix: &str, d_in: usize, d_h: usize, rng: &mut impl Rng) -> Result<Self> {
        let mut ids = Vec::with_capacity(9);
        for (i, s) in GRU_SUFFIXES.iter().enumerate() {
            let t = match i {
                0..=2 => xavier(d_h, d_in, rng)?,
                3..=5 => xavier(d_h, d_h, rng)?,
                _ => Tensor::zeros(vec![d_h])?,
            };
            ids.push(params.insert(&format!("{prefix}.{s}"), t)?);
        }
        Ok(Self::from_ids(&ids))
    }

    /// Looks up an existing GRU weight set registered under `prefix`.
    pub fn lookup(params: &ParamSet, prefix: &str) -> Result<Self> {
        let ids = GRU_SUFFIXES
            .iter()
            .map(|s| params.require(&format!("{prefix}.{s}")))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_ids(&ids))
    }

    fn from_ids(ids: &[ParamId]) -> Self {
        GruParams {
            w_z: ids[0],
            w_r: ids[1],
            w_h: ids[2],
            u_z: ids[3],
            u_r: ids[4],
            u_h: ids[5],
            b_z: ids[6],
            b_r: ids[7],
            b_h: ids[8],
        }
    }

    /// Scalar count of a GRU weight set with the given sizes.
    pub fn count(d_in: usize, d_h: usize) -> usize {
        3 * d_h * d_in + 3 * d_h * d_h + 3 * d_h
    }

    pub fn vars(&self, tape: &mut Tape) -> GruVars {
        GruVars {
            w_z: tape.param(self.w_z),
            w_r: tape.param(self.w_r),
            w_h: tape.param(self.w_h),
            u_z: tape.param(self.u_z),
            u_r: tape.param(self.u_r),
            u_h: tape.param(self.u_h),
            b_z: tape.param(self.b_z),
            b_r: tape.param(self.b_r),
            b_h: tape.param(self.b_h),
        }
    }
}

/// GRU weights as tape nodes.
#[derive(Debug, Clone, Copy)]
pub struct GruVars {
    pub w_z: Var,
    pub w_r: Var,
    pub w_h: Var,
    pub u_z: Var,
    pub u_r: Var,
    pub u_h: Var,
    pub b_z: Var,
    pub b_r: Var,
    pub b_h: Var,
}

fn gate(tape: &mut Tape, w: Var, x: Var, u: Var, h: Var, b: Var) -> Result<Var> {
    let wx = tape.matvec(w, x)?;
    let uh = tape.matvec(u, h)?;
    let s = tape.add(wx, uh)?;
    tape.add(s, b)
}

/// One GRU step:
///
/// ```text
/// z  = σ(W_z x + U_z h + b_z)
/// r  = σ(W_r x + U_r h + b_r)
/// h̃  = tanh(W_h x + U_h (r ⊙ h) + b_h)
/// h' = (1 − z) ⊙ h + z ⊙ h̃
/// ```
pub fn gru_cell(tape: &mut Tape, x: Var, h_prev: Var, w: &GruVars) -> Result<Var> {
    let z = gate(tape, w.w_z, x, w.u_z, h_prev, w.b_z)?;
    let z = tape.sigmoid(z);
    let r = gate(tape, w.w_r, x, w.u_r, h_prev, w.b_r)?;
    let r = tape.sigmoid(r);
    let rh = tape.mul(r, h_prev)?;
    let cand = gate(tape, w.w_h, x, w.u_h, rh, w.b_h)?;
    let cand = tape.tanh(cand);
    // h + z ⊙ (h̃ − h)
    let diff = tape.sub(cand, h_prev)?;
    let step = tape.mul(z, diff)?;
    tape.add(h_prev, step)
}

/// `tanh(W x)`.
pub fn tanh_proj(tape: &mut Tape, w: Var, x: Var) -> Result<Var> {
    let y = tape.matvec(w, x)?;
    Ok(tape.tanh(y))
}

/// Glorot-uniform `rows × cols` matrix.
pub fn xavier(rows: usize, cols: usize, rng: &mut impl Rng) -> Result<Tensor> {
    let bound = libm::sqrt(6.0 / (rows + cols) as f64);
    let data = (0..rows * cols).map(|_| rng.gen_range(-bound..bound)).collect();
    Tensor::matrix(rows, cols, data)
}

/// `rows × cols` matrix with entries uniform in `(-scale, scale)`.
pub fn uniform(rows: usize, cols: usize, scale: f64, rng: &mut impl Rng) -> Result<Tensor> {
    let data = (0..rows * cols).map(|_| rng.gen_range(-scale..scale)).collect();
    Tensor::matrix(rows, cols, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn zero_cell(d_in: usize, d_h: usize) -> (ParamSet, GruParams) {
        let mut ps = ParamSet::new();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let g = GruParams::init(&mut ps, "gru", d_in, d_h, &mut rng).unwrap();
        for id in ps.ids().collect::<Vec<_>>() {
            ps.get_mut(id).data_mut().iter_mut().for_each(|x| *x = 0.0);
        }
        (ps, g)
    }

    #[test]
    fn zero_weights_halve_previous_state() {
        let (ps, g) = zero_cell(3, 4);
        let mut t = Tape::with_params(&ps);
        let w = g.vars(&mut t);
        let x = t.constant(vec![3], vec![0.3, -2.0, 7.0]).unwrap();
        let h = t.constant(vec![4], vec![1.0, -2.0, 0.5, 4.0]).unwrap();
        let out = gru_cell(&mut t, x, h, &w).unwrap();
        assert_eq!(t.value(out), &[0.5, -1.0, 0.25, 2.0]);
    }

    #[test]
    fn zero_weights_zero_state_stays_zero() {
        let (ps, g) = zero_cell(3, 4);
        let mut t = Tape::with_params(&ps);
        let w = g.vars(&mut t);
        let x = t.constant(vec![3], vec![1.0, 1.0, 1.0]).unwrap();
        let h = t.constant(vec![4], vec![0.0; 4]).unwrap();
        let out = gru_cell(&mut t, x, h, &w).unwrap();
        assert_eq!(t.value(out), &[0.0; 4]);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let (ps, g) = zero_cell(3, 4);
        let mut t = Tape::with_params(&ps);
        let w = g.vars(&mut t);
        let x = t.constant(vec![2], vec![1.0, 1.0]).unwrap();
        let h = t.constant(vec![4], vec![0.0; 4]).unwrap();
        assert!(gru_cell(&mut t, x, h, &w).is_err());
    }

    #[test]
    fn parameter_count_formula() {
        let (ps, _) = zero_cell(3, 4);
        assert_eq!(ps.num_scalars(), GruParams::count(3, 4));
    }
}
