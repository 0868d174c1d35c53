use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{collect_results, run_indexed, ExperimentError};
use crate::ensembles::{complex_normal, stream_rng, streams, EnsembleParams, MpsSample, OmegaDist};
use crate::linalg::{self, frobenius, CMatrix, C64};
use crate::mps::{self, MpsError};

/// Perturbation sizes used when none are given.
pub const DEFAULT_SCALES: [f64; 3] = [1e-3, 1e-2, 1e-1];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerturbationKind {
    U,
    V,
    W,
    Lambda,
    Joint,
}

impl PerturbationKind {
    pub const ALL: [PerturbationKind; 5] = [Self::U, Self::V, Self::W, Self::Lambda, Self::Joint];
}

impl fmt::Display for PerturbationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::U => "u",
            Self::V => "v",
            Self::W => "w",
            Self::Lambda => "lambda",
            Self::Joint => "joint",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzOptions {
    pub pairs: usize,
    pub scales: Vec<f64>,
    pub omega_dist: OmegaDist,
    pub workers: usize,
}

impl LipschitzOptions {
    pub fn new(pairs: usize) -> Self {
        Self { pairs, scales: DEFAULT_SCALES.to_vec(), omega_dist: OmegaDist::Dirichlet, workers: 0 }
    }
}

/// One pair of nearby ensemble points. `f = (tr ρ_l)²`, `g = tr ρ_l²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzPair {
    pub pair: usize,
    pub kind: PerturbationKind,
    pub scale: f64,
    pub distance: f64,
    pub f: f64,
    pub f_perturbed: f64,
    pub g: f64,
    pub g_perturbed: f64,
    pub ratio_f: Option<f64>,
    pub ratio_g: Option<f64>,
}

impl LipschitzPair {
    pub const HEADER: [&'static str; 10] =
        ["pair", "kind", "scale", "distance", "f", "f_perturbed", "g", "g_perturbed", "ratio_f", "ratio_g"];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KindMaximum {
    pub kind: PerturbationKind,
    pub scale: f64,
    pub max_ratio_f: f64,
    pub max_ratio_g: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzReport {
    pub params: EnsembleParams,
    pub options: LipschitzOptions,
    /// `4n + 10`
    pub bound: f64,
    pub pairs_used: usize,
    pub skipped: usize,
    pub max_ratio_f: f64,
    pub max_ratio_g: f64,
    pub by_kind: Vec<KindMaximum>,
    pub passed: bool,
}

/// Largest difference quotients of `(tr ρ_l)²` and `tr ρ_l²` over structured
/// pairs, in the metric `‖ΔU‖₂ + ‖ΔV‖₂ + ‖ΔW‖₂ + ‖ΔΛ‖_∞`. `Ω` is shared
/// within a pair.
pub fn lipschitz_probe(
    params: &EnsembleParams,
    options: &LipschitzOptions,
) -> Result<(LipschitzReport, Vec<LipschitzPair>), ExperimentError> {
    params.validate()?;
    if options.pairs < 1000 {
        return Err(ExperimentError::TooFewSamples { what: "lipschitz_probe", min: 1000, got: options.pairs });
    }
    if options.scales.is_empty() || options.scales.iter().any(|s| s.is_nan() || *s <= 0.0) {
        return Err(ExperimentError::InvalidGrid("perturbation scales must be positive".into()));
    }
    let results = run_indexed(options.workers, options.pairs, |i| {
        let kind = PerturbationKind::ALL[i % 5];
        let scale = options.scales[(i / 5) % options.scales.len()];
        let base = MpsSample::draw(
            params,
            options.omega_dist,
            &mut stream_rng(params.seed, streams::sample(params.bond_dim, i)),
        );
        let mut rng = stream_rng(params.seed, streams::perturbation(params.bond_dim, i));
        let moved = perturb(&base, kind, scale, &mut rng);
        let distance = frobenius(&(&base.u - &moved.u))
            + frobenius(&(&base.v - &moved.v))
            + frobenius(&(&base.w - &moved.w))
            + base.lambda.iter().zip(&moved.lambda).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let (f, g) = observables(&base, params)?;
        let (f_perturbed, g_perturbed) = observables(&moved, params)?;
        let ratio = |a: f64, b: f64| (distance > 0.0).then(|| (a - b).abs() / distance);
        Ok::<_, MpsError>(LipschitzPair {
            pair: i,
            kind,
            scale,
            distance,
            f,
            f_perturbed,
            g,
            g_perturbed,
            ratio_f: ratio(f, f_perturbed),
            ratio_g: ratio(g, g_perturbed),
        })
    })?;
    let pairs = collect_results(results)?;

    let max_of = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0, f64::max);
    let max_ratio_f = max_of(&mut pairs.iter().filter_map(|p| p.ratio_f));
    let max_ratio_g = max_of(&mut pairs.iter().filter_map(|p| p.ratio_g));
    let skipped = pairs.iter().filter(|p| p.ratio_f.is_none()).count();
    let mut by_kind = Vec::new();
    for kind in PerturbationKind::ALL {
        for &scale in &options.scales {
            let matching = || pairs.iter().filter(move |p| p.kind == kind && p.scale == scale);
            by_kind.push(KindMaximum {
                kind,
                scale,
                max_ratio_f: max_of(&mut matching().filter_map(|p| p.ratio_f)),
                max_ratio_g: max_of(&mut matching().filter_map(|p| p.ratio_g)),
            });
        }
    }
    let bound = 4.0 * params.n as f64 + 10.0;
    let report = LipschitzReport {
        params: *params,
        options: options.clone(),
        bound,
        pairs_used: pairs.len() - skipped,
        skipped,
        max_ratio_f,
        max_ratio_g,
        by_kind,
        passed: max_ratio_f <= bound && max_ratio_g <= bound,
    };
    Ok((report, pairs))
}

fn observables(sample: &MpsSample, params: &EnsembleParams) -> Result<(f64, f64), MpsError> {
    let rho = mps::reduced_density(sample, params)?;
    let trace = rho.trace();
    Ok((trace * trace, rho.purity()))
}

/// Hermitian matrix with unit Hilbert–Schmidt norm.
fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| complex_normal(rng));
    let h = linalg::hermitize(&g);
    let norm = frobenius(&h);
    h.unscale(norm)
}

/// Cayley transform `(I − iεH/2)⁻¹ (I + iεH/2)`, a unitary within `O(ε)` of
/// the identity.
pub fn cayley(h: &CMatrix, eps: f64) -> CMatrix {
    let dim = h.nrows();
    let step = h.map(|z| z * C64::new(0.0, eps / 2.0));
    let id = CMatrix::identity(dim, dim);
    let plus = &id + &step;
    let minus = &id - &step;
    minus.lu().solve(&plus).expect("I − iεH/2 is invertible for Hermitian H")
}

fn rotate<R: Rng + ?Sized>(u: &CMatrix, eps: f64, rng: &mut R) -> CMatrix {
    let h = random_hermitian(u.nrows(), rng);
    linalg::matmul(&cayley(&h, eps), u)
}

fn perturb<R: Rng + ?Sized>(base: &MpsSample, kind: PerturbationKind, eps: f64, rng: &mut R) -> MpsSample {
    let mut moved = base.clone();
    let all = kind == PerturbationKind::Joint;
    if all || kind == PerturbationKind::U {
        moved.u = rotate(&base.u, eps, rng);
    }
    if all || kind == PerturbationKind::V {
        moved.v = rotate(&base.v, eps, rng);
    }
    if all || kind == PerturbationKind::W {
        moved.w = rotate(&base.w, eps, rng);
    }
    if all || kind == PerturbationKind::Lambda {
        for x in moved.lambda.iter_mut() {
            *x = (*x + eps * rng.random_range(-1.0..=1.0)).clamp(0.0, 1.0);
        }
    }
    moved.refresh();
    moved
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cayley_is_unitary_and_close() {
        let mut rng = stream_rng(1, 0);
        let h = random_hermitian(6, &mut rng);
        let c = cayley(&h, 0.01);
        let defect = linalg::distance_from_identity(&linalg::mul(&c, linalg::Op::Adjoint, &c, linalg::Op::Plain));
        assert!(defect < 1e-12);
        let dist = frobenius(&(c - CMatrix::identity(6, 6)));
        assert!((dist - 0.01).abs() < 1e-4);
    }

    #[test]
    fn perturbation_touches_only_its_coordinate() {
        let params = EnsembleParams::new(2, 3, 4, 2, 0).unwrap();
        let base = MpsSample::draw(&params, OmegaDist::Dirichlet, &mut stream_rng(0, 0));
        let moved = perturb(&base, PerturbationKind::V, 0.1, &mut stream_rng(0, 1));
        assert_eq!(moved.u, base.u);
        assert_eq!(moved.w, base.w);
        assert_eq!(moved.lambda, base.lambda);
        assert_ne!(moved.v, base.v);
        assert!(moved.isometry_defect() < 1e-10);
    }

    #[test]
    fn small_probe_respects_bound() {
        let params = EnsembleParams::new(2, 4, 4, 2, 3).unwrap();
        let mut options = LipschitzOptions::new(1000);
        options.workers = 2;
        let (report, pairs) = lipschitz_probe(&params, &options).unwrap();
        assert_eq!(pairs.len(), 1000);
        assert!(report.passed, "{report:?}");
        assert_eq!(report.by_kind.len(), 15);
        assert!(report.max_ratio_f > 0.0);
    }

    #[test]
    fn identical_pairs_are_skipped() {
        let params = EnsembleParams::new(2, 2, 2, 2, 0).unwrap();
        let base = MpsSample::draw(&params, OmegaDist::Dirichlet, &mut stream_rng(0, 0));
        let moved = perturb(&base, PerturbationKind::Lambda, 0.0, &mut stream_rng(0, 1));
        assert_eq!(moved.lambda, base.lambda);
        let mut options = LipschitzOptions::new(1000);
        options.scales = vec![0.0];
        assert!(lipschitz_probe(&params, &options).is_err());
    }
}
