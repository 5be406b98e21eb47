//! Preconditioned iterative refinement with one pass per residual update.

use super::precond::Preconditioner;
use super::sparsify::{sparsify, SparsifyConfig};
use super::{apply, SddmSource};
use crate::error::{Error, Result};
use crate::scalar::{dot, Real};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StreamLsConfig {
    pub sparsify: SparsifyConfig,
    /// Fresh sparsifiers drawn after a detected contraction failure.
    pub max_retries: u32,
}

impl Default for StreamLsConfig {
    fn default() -> Self {
        StreamLsConfig {
            sparsify: SparsifyConfig::default(),
            max_retries: 3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct StreamLsReport<T> {
    pub x: Vec<T>,
    /// Passes over the source, including any spent on retries.
    pub passes: u64,
    pub iterations: u32,
    pub retries: u32,
    pub delta: f64,
    /// Words held at once: sparsifier, factorization and working vectors.
    pub peak_words: u64,
}

/// Sparsifier quality used for an `n`-dimensional system.
pub fn quality(n: usize) -> f64 {
    let lg = (n as f64).log2();
    if lg <= 8.0 {
        0.125
    } else {
        1.0 / lg
    }
}

/// Refinement steps needed to contract the error by `eps` at rate `4 delta`.
pub fn iteration_count(eps: f64, delta: f64) -> u32 {
    ((1.0 / eps).ln() / (1.0 / (4.0 * delta)).ln())
        .ceil()
        .max(1.0) as u32
}

/// Passes a successful `stream_ls` call consumes.
pub fn pass_count(n: usize, eps: f64) -> u64 {
    1 + iteration_count(eps, quality(n)) as u64
}

/// Solves `A x = b` to relative `A`-norm error `eps`.
///
/// `observer` sees every iterate `x_t` (starting with `x_0 = 0`).
pub fn stream_ls<T: Real>(
    sys: &dyn SddmSource<T>,
    b: &[T],
    eps: f64,
    cfg: &StreamLsConfig,
    mut observer: Option<&mut dyn FnMut(u32, &[T])>,
) -> Result<StreamLsReport<T>> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Parameter(format!(
            "solve tolerance {eps} outside (0, 1)"
        )));
    }
    let n = sys.dim();
    let prec = sys.precision();
    let delta = quality(n);
    let iters = iteration_count(eps, delta);
    let inner_tol = delta / 2.0;
    // Allowed growth of the measured residual norm per step; the measured
    // norm is within (1 +- 2 delta) of the true A-norm error.
    let rate = 4.0 * delta * (1.0 + 2.0 * delta) / (1.0 - 2.0 * delta);
    let floor = 1e4 * T::unit_roundoff(prec);

    let mut passes = 0u64;
    for attempt in 0..=cfg.max_retries {
        let sp_cfg = cfg
            .sparsify
            .with_seed(cfg.sparsify.seed.wrapping_add(attempt as u64));
        let h = sparsify(sys, delta, &sp_cfg)?;
        passes += 1;
        let pc = match Preconditioner::new(&h, sys.diagonal(), prec) {
            Ok(pc) => pc,
            Err(Error::SingularPreconditioner) if attempt < cfg.max_retries => continue,
            Err(e) => return Err(e),
        };
        let words = ((3 * h.edges.len() + pc.stored_entries() + 4 * n) * prec.words()) as u64;
        let mut x = vec![T::zero(prec); n];
        let mut r: Vec<T> = b.to_vec();
        let mut ay = vec![T::zero(prec); n];
        if let Some(obs) = observer.as_mut() {
            obs(0, &x);
        }
        let mut first_norm: Option<f64> = None;
        let mut prev_norm: Option<f64> = None;
        let mut failed = false;
        for t in 1..=iters {
            let y = pc.solve(&r, inner_tol)?;
            let norm = dot(&r, &y, prec).abs().sqrt().to_f64();
            let base = *first_norm.get_or_insert(norm);
            if let Some(prev) = prev_norm {
                if prev > floor * base && norm > rate * prev {
                    failed = true;
                    break;
                }
            }
            prev_norm = Some(norm);
            apply(sys, &y, &mut ay)?;
            passes += 1;
            for i in 0..n {
                r[i] -= &ay[i];
                x[i] += &y[i];
            }
            if let Some(obs) = observer.as_mut() {
                obs(t, &x);
            }
        }
        if !failed {
            return Ok(StreamLsReport {
                x,
                passes,
                iterations: iters,
                retries: attempt,
                delta,
                peak_words: words,
            });
        }
    }
    Err(Error::SolverDivergence(format!(
        "refinement failed to contract after {} sparsifier draws",
        cfg.max_retries + 1
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Precision;
    use crate::sdd::ExplicitSddm;

    #[test]
    fn parameters() {
        assert_eq!(quality(2), 0.125);
        assert_eq!(quality(256), 0.125);
        assert!((quality(1024) - 0.1).abs() < 1e-15);
        assert_eq!(iteration_count(1e-4, 0.125), 14);
        assert_eq!(iteration_count(1e-2, 0.125), 7);
        assert_eq!(iteration_count(0.9, 0.125), 1);
        assert_eq!(pass_count(100, 1e-6), 21);
    }

    #[test]
    fn identity_system() {
        let sys = ExplicitSddm::new(vec![1.0; 3], vec![], Precision::DOUBLE);
        let mut seen = Vec::new();
        let mut obs = |t: u32, x: &[f64]| seen.push((t, x.to_vec()));
        let rep = stream_ls(
            &sys,
            &[1.0, -2.0, 0.5],
            1e-6,
            &StreamLsConfig::default(),
            Some(&mut obs),
        )
        .unwrap();
        assert_eq!(seen[1].1, vec![1.0, -2.0, 0.5]);
        assert_eq!(rep.x, vec![1.0, -2.0, 0.5]);
        assert_eq!(rep.passes, sys.passes());
        assert_eq!(rep.passes, pass_count(3, 1e-6));
    }

    #[test]
    fn two_by_two() {
        let sys = ExplicitSddm::new(vec![1.0, 1.0], vec![(0, 1, 1.0)], Precision::DOUBLE);
        let rep = stream_ls(&sys, &[1.0, 0.0], 1e-8, &StreamLsConfig::default(), None).unwrap();
        assert!((rep.x[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((rep.x[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_tolerance() {
        let sys = ExplicitSddm::new(vec![1.0], vec![], Precision::DOUBLE);
        assert!(stream_ls(&sys, &[1.0], 0.0, &StreamLsConfig::default(), None).is_err());
        assert_eq!(sys.passes(), 0);
    }
}
