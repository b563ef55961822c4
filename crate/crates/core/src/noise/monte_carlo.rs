//! Stochastic dephasing by averaging over sampled phase kicks.
//!
//! A trajectory draws the accumulated field phase `Phi ~ N(0, gamma t)` (one per
//! register for global noise, one per site for local noise) and applies
//! `U = exp(-i sum_k Phi_k Z_k / 2)`. Since `U` is diagonal, basis states with
//! the same phase are grouped into classes: by magnetization for global noise,
//! one class per index otherwise. Each trajectory then costs `O(classes^2)`.
//!
//! Trajectory `j` uses a ChaCha8 stream seeded from `(seed, j)`, and trajectories
//! are summed in fixed-size chunks reduced in chunk order, so results do not
//! depend on the thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::bits::{magnetization_unchecked, site_bit};
use crate::noise::Correlation;
use crate::state::{purity, DensityMatrix};
use crate::{c, CMatrix, Error, Result};
use num_complex::Complex64;

const CHUNK: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonteCarloSettings {
    pub gamma: f64,
    pub t: f64,
    pub n_traj: usize,
    pub seed: u64,
    pub correlation: Correlation,
}

/// Sample mean of a per-trajectory quantity with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeStat {
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug)]
pub struct MonteCarloEstimate {
    pub state: DensityMatrix,
    /// One entry per probe operator, in input order.
    pub probes: Vec<ProbeStat>,
    /// Purity of `state`, with the standard error of its linearization `Tr(2 rho_bar rho_j)`.
    pub purity: ProbeStat,
    /// Upper bound on the positive bias of `purity`: `(P_0 - P)/n_traj`.
    pub purity_bias: f64,
}

struct Classes {
    /// class of each basis index
    of: Vec<usize>,
    /// `z` value (`+1` for bit 0) of each site, per class
    signs: Vec<Vec<f64>>,
    /// number of independent phases
    fields: usize,
}

impl Classes {
    fn new(n: usize, correlation: Correlation) -> Self {
        let dim = 1usize << n;
        match correlation {
            Correlation::Global => {
                let of = (0..dim).map(|a| (a.count_ones()) as usize).collect();
                let signs = (0..=n).map(|k| vec![magnetization_unchecked((1 << k) - 1, n) as f64]).collect();
                Classes { of, signs, fields: 1 }
            }
            Correlation::Local => {
                let of = (0..dim).collect();
                let signs = (0..dim)
                    .map(|a| (0..n).map(|s| 1.0 - 2.0 * site_bit(a, s, n) as f64).collect())
                    .collect();
                Classes { of, signs, fields: n }
            }
        }
    }

    fn len(&self) -> usize {
        self.signs.len()
    }

    /// `Phi_k` for trajectory `index`.
    fn sample(&self, sigma: f64, seed: u64, index: usize, out: &mut [f64]) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);
        let normal = Normal::new(0.0, sigma).expect("finite sigma");
        for phi in out.iter_mut().take(self.fields) {
            *phi = normal.sample(&mut rng);
        }
    }

    /// `u_A = exp(-i sum_k Phi_k z_k(A) / 2)`
    fn phases(&self, phi: &[f64], out: &mut [Complex64]) {
        for (u, signs) in out.iter_mut().zip(&self.signs) {
            let theta: f64 = signs.iter().zip(phi).map(|(z, p)| z * p).sum::<f64>() * 0.5;
            *u = Complex64::from_polar(1.0, -theta);
        }
    }

    /// `W_AB = sum_{a in A, b in B} X_ab` for a matrix `X`.
    fn compress(&self, m: &CMatrix) -> Vec<Complex64> {
        let k = self.len();
        let mut w = vec![c(0.0, 0.0); k * k];
        for a in 0..m.nrows() {
            for b in 0..m.ncols() {
                w[self.of[a] * k + self.of[b]] += m[(a, b)];
            }
        }
        w
    }
}

/// Running `(count, mean, M2)` combined with Chan's pairwise update.
#[derive(Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if self.n == 0.0 {
            return o;
        }
        if o.n == 0.0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Moments { n, mean: self.mean + d * o.n / n, m2: self.m2 + o.m2 + d * d * self.n * o.n / n }
    }

    fn stat(&self) -> ProbeStat {
        let std_error = if self.n > 1.0 { (self.m2.max(0.0) / (self.n - 1.0) / self.n).sqrt() } else { f64::INFINITY };
        ProbeStat { mean: self.mean, std_error }
    }
}

struct Partial {
    pairs: Vec<Complex64>,
    probes: Vec<Moments>,
}

/// Sums over all trajectories of `u_A conj(u_B)` and of each compressed probe
/// `Re sum_AB W_AB conj(u_A) u_B`.
fn run(settings: &MonteCarloSettings, classes: &Classes, weights: &[Vec<Complex64>]) -> Partial {
    let k = classes.len();
    let sigma = (settings.gamma * settings.t).sqrt();
    let n_chunks = settings.n_traj.div_ceil(CHUNK);
    let partials: Vec<Partial> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut pairs = vec![c(0.0, 0.0); k * k];
            let mut probes = vec![Moments::default(); weights.len()];
            let mut phi = vec![0.0; classes.fields];
            let mut u = vec![c(0.0, 0.0); k];
            let end = ((chunk + 1) * CHUNK).min(settings.n_traj);
            for j in chunk * CHUNK..end {
                classes.sample(sigma, settings.seed, j, &mut phi);
                classes.phases(&phi, &mut u);
                for a in 0..k {
                    for b in 0..k {
                        pairs[a * k + b] += u[a] * u[b].conj();
                    }
                }
                for (w, mom) in weights.iter().zip(probes.iter_mut()) {
                    // Tr(A rho_j) = sum_ab A_ba rho_ab u_a conj(u_b); w holds A^T .* rho
                    let mut acc = c(0.0, 0.0);
                    for a in 0..k {
                        for b in 0..k {
                            acc += w[a * k + b] * u[a] * u[b].conj();
                        }
                    }
                    mom.push(acc.re);
                }
            }
            Partial { pairs, probes }
        })
        .collect();
    partials
        .into_iter()
        .reduce(|mut acc, p| {
            for (x, y) in acc.pairs.iter_mut().zip(&p.pairs) {
                *x += y;
            }
            for (x, y) in acc.probes.iter_mut().zip(p.probes) {
                *x = x.merge(y);
            }
            acc
        })
        .expect("at least one chunk")
}

fn check(rho0: &DensityMatrix, settings: &MonteCarloSettings) -> Result<()> {
    if settings.n_traj == 0 {
        return Err(Error::InvalidParameter("n_traj must be >= 1".into()));
    }
    if settings.t < 0.0 {
        return Err(Error::NegativeTime(settings.t));
    }
    if !(settings.gamma >= 0.0 && settings.gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!("gamma must be >= 0, got {}", settings.gamma)));
    }
    crate::check_register(rho0.n_qubits())
}

fn average(rho0: &DensityMatrix, classes: &Classes, pairs: &[Complex64], n_traj: usize) -> Result<DensityMatrix> {
    let k = classes.len();
    let scale = 1.0 / n_traj as f64;
    let mut m = rho0.entries().clone();
    let dim = rho0.dim();
    for a in 0..dim {
        for b in 0..dim {
            if a != b {
                m[(a, b)] *= pairs[classes.of[a] * k + classes.of[b]] * scale;
            }
        }
    }
    DensityMatrix::from_entries_unchecked(m)
}

/// `A^T .* rho`, compressed to classes: the per-trajectory expectation is
/// `Re sum_AB W_AB u_A conj(u_B)`.
fn probe_weights(classes: &Classes, probe: &CMatrix, rho0: &DensityMatrix) -> Result<Vec<Complex64>> {
    let rho = rho0.entries();
    if probe.shape() != rho.shape() {
        return Err(Error::DimensionMismatch { expected: rho.nrows(), got: probe.nrows() });
    }
    let prod = CMatrix::from_fn(rho.nrows(), rho.ncols(), |a, b| probe[(b, a)] * rho[(a, b)]);
    Ok(classes.compress(&prod))
}

/// Trajectory average of `U rho0 U^dagger` for dephasing noise.
pub fn monte_carlo_dephasing(
    rho0: &DensityMatrix,
    gamma: f64,
    t: f64,
    n_traj: usize,
    seed: u64,
    correlation: Correlation,
) -> Result<DensityMatrix> {
    let settings = MonteCarloSettings { gamma, t, n_traj, seed, correlation };
    check(rho0, &settings)?;
    let classes = Classes::new(rho0.n_qubits(), correlation);
    let sums = run(&settings, &classes, &[]);
    average(rho0, &classes, &sums.pairs, n_traj)
}

/// Averaged state plus per-trajectory statistics of `Tr(A rho_j)` for each Hermitian probe.
///
/// Purity takes a second pass over the same trajectories.
pub fn monte_carlo_estimate(
    rho0: &DensityMatrix,
    settings: &MonteCarloSettings,
    probes: &[CMatrix],
) -> Result<MonteCarloEstimate> {
    check(rho0, settings)?;
    let classes = Classes::new(rho0.n_qubits(), settings.correlation);
    let weights = probes.iter().map(|p| probe_weights(&classes, p, rho0)).collect::<Result<Vec<_>>>()?;
    let sums = run(settings, &classes, &weights);
    let state = average(rho0, &classes, &sums.pairs, settings.n_traj)?;

    let twice_mean = state.entries() * c(2.0, 0.0);
    let linear = run(settings, &classes, &[probe_weights(&classes, &twice_mean, rho0)?]);
    let p = purity(&state);
    let purity_stat = ProbeStat { mean: p, std_error: linear.probes[0].stat().std_error };
    let purity_bias = ((purity(rho0) - p) / settings.n_traj as f64).max(0.0);

    Ok(MonteCarloEstimate {
        state,
        probes: sums.probes.iter().map(Moments::stat).collect(),
        purity: purity_stat,
        purity_bias,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{builtin, eigenstate, LogicalAxis};
    use crate::noise::{global_dephasing_map, local_dephasing_map};
    use crate::pauli::PauliString;
    use crate::state::{expectation, PureState};
    use crate::CVector;

    fn plus(n: usize) -> DensityMatrix {
        PureState::normalized(CVector::from_element(1 << n, c(1.0, 0.0))).unwrap().to_density()
    }

    fn settings(n_traj: usize, correlation: Correlation) -> MonteCarloSettings {
        MonteCarloSettings { gamma: 1.0, t: 1.0, n_traj, seed: 7, correlation }
    }

    #[test]
    fn single_qubit_coherence_within_error_bar() {
        let x = PauliString::parse("X", 1).unwrap().realize().unwrap();
        let est = monte_carlo_estimate(&plus(1), &settings(20_000, Correlation::Global), &[x.clone()]).unwrap();
        let exact = (-0.5f64).exp();
        let stat = est.probes[0];
        assert!(stat.std_error > 0.0 && stat.std_error < 0.01);
        assert!((stat.mean - exact).abs() < 3.0 * stat.std_error, "{stat:?}");
        // the state and the probe are the same trajectory average
        assert!((expectation(&x, &est.state).unwrap() - stat.mean).abs() < 1e-12);
    }

    #[test]
    fn converges_to_analytic_maps() {
        let rho = plus(3);
        for (corr, exact) in [
            (Correlation::Global, global_dephasing_map(&rho, 1.0, 1.0).unwrap()),
            (Correlation::Local, local_dephasing_map(&rho, 1.0, 1.0).unwrap()),
        ] {
            let mc = monte_carlo_dephasing(&rho, 1.0, 1.0, 40_000, 3, corr).unwrap();
            assert!(mc.max_abs_diff(&exact) < 0.02, "{corr:?}");
            assert!((mc.trace() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn reproducible_for_fixed_seed() {
        let rho = plus(2);
        let a = monte_carlo_dephasing(&rho, 0.8, 1.3, 3000, 11, Correlation::Local).unwrap();
        let b = monte_carlo_dephasing(&rho, 0.8, 1.3, 3000, 11, Correlation::Local).unwrap();
        let other = monte_carlo_dephasing(&rho, 0.8, 1.3, 3000, 12, Correlation::Local).unwrap();
        assert_eq!(a, b);
        assert!(a.max_abs_diff(&other) > 0.0);
        // prefix of a longer run uses the same streams
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c1 = single.install(|| monte_carlo_dephasing(&rho, 0.8, 1.3, 3000, 11, Correlation::Local).unwrap());
        assert_eq!(a, c1);
    }

    #[test]
    fn decoherence_free_states_are_untouched_per_trajectory() {
        let code = builtin("grassl_dfs").unwrap();
        let rho = eigenstate(&code, LogicalAxis::PlusX).to_density();
        let [xl, _, _] = code.logical_matrices();
        let est = monte_carlo_estimate(&rho, &settings(500, Correlation::Global), &[xl.clone()]).unwrap();
        assert!(est.state.max_abs_diff(&rho) < 1e-12);
        assert!((est.probes[0].mean - 1.0).abs() < 1e-12);
        assert!(est.probes[0].std_error < 1e-12);
        assert!(est.purity_bias < 1e-14);
    }

    #[test]
    fn purity_statistics() {
        let rho = plus(2);
        let est = monte_carlo_estimate(&rho, &settings(20_000, Correlation::Local), &[]).unwrap();
        let exact = purity(&local_dephasing_map(&rho, 1.0, 1.0).unwrap());
        let tol = 4.0 * est.purity.std_error + est.purity_bias + 1e-12;
        assert!((est.purity.mean - exact).abs() < tol, "{:?} vs {exact}", est.purity);
        assert!(est.purity_bias > 0.0);
    }

    #[test]
    fn bad_inputs() {
        let rho = plus(1);
        assert!(matches!(monte_carlo_dephasing(&rho, 1.0, 1.0, 0, 0, Correlation::Global), Err(Error::InvalidParameter(_))));
        assert!(matches!(monte_carlo_dephasing(&rho, 1.0, -1.0, 5, 0, Correlation::Global), Err(Error::NegativeTime(_))));
        let wrong = CMatrix::identity(4, 4);
        assert!(monte_carlo_estimate(&rho, &settings(5, Correlation::Global), &[wrong]).is_err());
        let zero_time = monte_carlo_dephasing(&rho, 1.0, 0.0, 7, 0, Correlation::Local).unwrap();
        assert!(zero_time.max_abs_diff(&rho) < 1e-15);
    }
}
