//! Finite-difference verification of tape gradients.

use alloc::vec::Vec;

use super::autodiff::{Tape, Var};
use super::matrix::{Matrix, Result};

const STEP: f64 = 1e-5;

/// Compare analytic gradients of a scalar function against central
/// finite differences.
///
/// `f` must be deterministic: any randomness (dropout masks, noise
/// draws) has to be captured outside and passed in as constants.
/// Returns the maximum over all parameter coordinates of
/// `|analytic - numeric| / max(1, |numeric|)`.
pub fn finite_diff_check<F>(f: F, params: &[Matrix]) -> Result<f64>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var>,
{
    let mut tape = Tape::new();
    let vars: Vec<Var> = params.iter().map(|p| tape.param(p.clone())).collect();
    let loss = f(&mut tape, &vars)?;
    tape.backward(loss)?;
    let analytic: Vec<Matrix> = vars
        .iter()
        .zip(params)
        .map(|(&v, p)| {
            tape.grad(v)
                .cloned()
                .unwrap_or_else(|| Matrix::zeros(p.rows(), p.cols()))
        })
        .collect();

    let eval = |perturbed: &[Matrix]| -> Result<f64> {
        let mut t = Tape::new();
        let vs: Vec<Var> = perturbed.iter().map(|p| t.leaf(p.clone())).collect();
        let out = f(&mut t, &vs)?;
        t.value(out).as_scalar()
    };

    let mut max_rel: f64 = 0.0;
    let mut work: Vec<Matrix> = params.to_vec();
    for pi in 0..params.len() {
        for idx in 0..params[pi].len() {
            let orig = params[pi].data()[idx];
            work[pi].data_mut()[idx] = orig + STEP;
            let plus = eval(&work)?;
            work[pi].data_mut()[idx] = orig - STEP;
            let minus = eval(&work)?;
            work[pi].data_mut()[idx] = orig;
            let numeric = (plus - minus) / (2.0 * STEP);
            let rel = (analytic[pi].data()[idx] - numeric).abs() / numeric.abs().max(1.0);
            max_rel = max_rel.max(rel);
        }
    }
    Ok(max_rel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitRng;

    #[test]
    fn linear_function_checks_to_machine_precision() {
        let w = Matrix::new(2, 2, alloc::vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let err = finite_diff_check(
            |tape, vars| {
                let scaled = tape.affine(vars[0], 3.0, -1.0)?;
                tape.sum_all(scaled)
            },
            &[w],
        )
        .unwrap();
        assert!(err < 1e-8, "linear grad check error {err}");
    }

    #[test]
    fn three_layer_mlp_matches_finite_differences() {
        let mut rng = SplitRng::seed_from(17);
        let x = Matrix::from_fn(4, 3, |_, _| rng.standard_normal()).unwrap();
        let w1 = Matrix::from_fn(3, 5, |_, _| rng.standard_normal() * 0.5).unwrap();
        let b1 = Matrix::from_fn(1, 5, |_, _| rng.standard_normal() * 0.1).unwrap();
        let w2 = Matrix::from_fn(5, 4, |_, _| rng.standard_normal() * 0.5).unwrap();
        let b2 = Matrix::from_fn(1, 4, |_, _| rng.standard_normal() * 0.1).unwrap();
        let w3 = Matrix::from_fn(4, 1, |_, _| rng.standard_normal() * 0.5).unwrap();

        let err = finite_diff_check(
            |tape, vars| {
                let input = tape.leaf(x.clone());
                let h1 = tape.matmul(input, vars[0])?;
                let h1 = tape.add_broadcast(h1, vars[1])?;
                let h1 = tape.elu(h1)?;
                let h2 = tape.matmul(h1, vars[2])?;
                let h2 = tape.add_broadcast(h2, vars[3])?;
                let h2 = tape.sigmoid(h2)?;
                let out = tape.matmul(h2, vars[4])?;
                let sq = tape.mul(out, out)?;
                tape.mean_all(sq)
            },
            &[w1, b1, w2, b2, w3],
        )
        .unwrap();
        assert!(err < 1e-4, "mlp grad check error {err}");
    }
}
