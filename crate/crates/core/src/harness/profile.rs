//! Surface families given by closed-form log-radial profiles.

use crate::geometry::{convexity_check, RadialSurface};
use crate::spectral::extended::{div, Dd, ExtendedGrid};
use crate::spectral::{ScalarField, SphereGrid};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::fmt;
use std::sync::Arc;

/// Attempts allowed to shrink a random profile into a convex one.
pub const MAX_RESAMPLES: usize = 100;

/// One spherical-harmonic term `amplitude · Y_ℓ^m`.
///
/// `m = 0` is the zonal harmonic about the last coordinate axis, normalized
/// to 1 at the pole (the Legendre polynomial for `n = 2`, Gegenbauer
/// `C_ℓ^{(n−1)/2}` in general). Nonzero `m` is available for `n = 2` only:
/// Schmidt-normalized Ferrers functions times `cos(mφ)` for `m > 0` and
/// `sin(|m|φ)` for `m < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicTerm {
    pub l: usize,
    pub m: i64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SurfaceKind {
    /// Round sphere of radius `e^t` centered at the origin.
    Sphere {
        t: f64,
    },
    /// Unit sphere centered at `a`, `|a| < 1`.
    TranslatedSphere {
        a: Vec<f64>,
    },
    /// Axis-aligned ellipsoid with the given semi-axes.
    Ellipsoid {
        axes: Vec<f64>,
    },
    HarmonicPerturbation {
        terms: Vec<HarmonicTerm>,
    },
    /// Random zonal harmonics about random axes with amplitude `∝ ℓ^{-3}`,
    /// shrunk by 0.8 until convex.
    RandomConvex {
        seed: u64,
        band: usize,
        amplitude: f64,
    },
}

/// A surface family member together with its grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSpec {
    pub kind: SurfaceKind,
    pub n: usize,
    pub shape: Vec<usize>,
}

/// Default grid: `(32, 64)` for `n = 2`, `(12, 12, 24)` for `n = 3`, and
/// 12 polar / 24 azimuthal nodes otherwise.
pub fn default_shape(n: usize) -> Vec<usize> {
    match n {
        2 => vec![32, 64],
        _ => {
            let mut s = vec![12; n.saturating_sub(1)];
            s.push(24);
            s
        }
    }
}

impl SurfaceSpec {
    pub fn new(kind: SurfaceKind, n: usize, shape: Vec<usize>) -> Self {
        SurfaceSpec { kind, n, shape }
    }

    pub fn with_default_shape(kind: SurfaceKind, n: usize) -> Self {
        SurfaceSpec {
            kind,
            n,
            shape: default_shape(n),
        }
    }

    pub fn sphere(n: usize) -> Self {
        Self::with_default_shape(SurfaceKind::Sphere { t: 0.0 }, n)
    }

    /// Ellipsoid with semi-axes `(1, …, 1, 1 + eps)`.
    pub fn ellipsoid_family(n: usize, eps: f64) -> Self {
        let mut axes = vec![1.0; n + 1];
        axes[n] = 1.0 + eps;
        Self::with_default_shape(SurfaceKind::Ellipsoid { axes }, n)
    }

    pub fn with_shape(mut self, shape: Vec<usize>) -> Self {
        self.shape = shape;
        self
    }

    /// Short kind name as used on the command line.
    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            SurfaceKind::Sphere { .. } => "sphere",
            SurfaceKind::TranslatedSphere { .. } => "translated-sphere",
            SurfaceKind::Ellipsoid { .. } => "ellipsoid",
            SurfaceKind::HarmonicPerturbation { .. } => "harmonic",
            SurfaceKind::RandomConvex { .. } => "random-convex",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.n + 1;
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.n < 2 {
            return Err(Error::InvalidDimension(self.n));
        }
        match &self.kind {
            SurfaceKind::Sphere { t } => {
                if !t.is_finite() {
                    return bad(format!("scale t = {t} is not finite"));
                }
            }
            SurfaceKind::TranslatedSphere { a } => {
                if a.len() != d {
                    return bad(format!("center needs {d} components, got {}", a.len()));
                }
                let r = a.iter().map(|v| v * v).sum::<f64>().sqrt();
                if !(r < 1.0) {
                    return bad(format!("center norm {r} must be below 1"));
                }
            }
            SurfaceKind::Ellipsoid { axes } => {
                if axes.len() != d {
                    return bad(format!("ellipsoid needs {d} semi-axes, got {}", axes.len()));
                }
                if axes.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
                    return bad("semi-axes must be positive".into());
                }
            }
            SurfaceKind::HarmonicPerturbation { terms } => {
                for t in terms {
                    if t.m.unsigned_abs() as usize > t.l {
                        return bad(format!("|m| = {} exceeds l = {}", t.m.abs(), t.l));
                    }
                    if t.m != 0 && self.n != 2 {
                        return bad("non-zonal harmonics are only available for n = 2".into());
                    }
                    if !t.amplitude.is_finite() {
                        return bad("amplitude must be finite".into());
                    }
                }
            }
            SurfaceKind::RandomConvex {
                band, amplitude, ..
            } => {
                if *band < 1 {
                    return bad("band must be at least 1".into());
                }
                if !(amplitude.is_finite() && *amplitude > 0.0) {
                    return bad("amplitude cap must be positive".into());
                }
            }
        }
        Ok(())
    }

    /// Human-readable provenance tag.
    pub fn provenance(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for SurfaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        match &self.kind {
            SurfaceKind::Sphere { t } => write!(f, "sphere(t={t})")?,
            SurfaceKind::TranslatedSphere { a } => write!(f, "translated-sphere(a={})", list(a))?,
            SurfaceKind::Ellipsoid { axes } => write!(f, "ellipsoid(axes={})", list(axes))?,
            SurfaceKind::HarmonicPerturbation { terms } => {
                let t: Vec<String> = terms
                    .iter()
                    .map(|t| format!("{}:{}:{}", t.l, t.m, t.amplitude))
                    .collect();
                write!(f, "harmonic(terms={})", t.join(";"))?
            }
            SurfaceKind::RandomConvex {
                seed,
                band,
                amplitude,
            } => write!(
                f,
                "random-convex(seed={seed},band={band},amplitude={amplitude})"
            )?,
        }
        let shape: Vec<String> = self.shape.iter().map(|s| s.to_string()).collect();
        write!(f, " n={} shape={}", self.n, shape.join("x"))
    }
}

/// `C_ℓ^λ(t) / C_ℓ^λ(1)`, the zonal harmonic of degree `ℓ` on `S^n` with `λ = (n−1)/2`.
pub fn zonal(n: usize, l: usize, t: f64) -> f64 {
    let lambda = 0.5 * (n as f64 - 1.0);
    let gegenbauer = |x: f64| {
        let (mut prev, mut cur) = (1.0, 2.0 * lambda * x);
        if l == 0 {
            return 1.0;
        }
        for k in 1..l {
            let k = k as f64;
            let next = (2.0 * x * (k + lambda) * cur - (k + 2.0 * lambda - 1.0) * prev) / (k + 1.0);
            prev = cur;
            cur = next;
        }
        cur
    };
    gegenbauer(t) / gegenbauer(1.0)
}

/// Schmidt semi-normalized Ferrers function `√((ℓ−m)!/(ℓ+m)!) P_ℓ^m(x)`, no Condon–Shortley phase.
pub fn ferrers(l: usize, m: usize, x: f64) -> f64 {
    let s = (1.0 - x * x).max(0.0).sqrt();
    // P_m^m = (2m−1)!! s^m
    let mut pmm = 1.0;
    for k in 1..=m {
        pmm *= (2 * k - 1) as f64 * s;
    }
    let value = if l == m {
        pmm
    } else {
        let mut prev = pmm;
        let mut cur = x * (2 * m + 1) as f64 * pmm;
        for k in m + 2..=l {
            let next = ((2 * k - 1) as f64 * x * cur - (k + m - 1) as f64 * prev) / (k - m) as f64;
            prev = cur;
            cur = next;
        }
        cur
    };
    let mut ratio = 1.0;
    for k in l - m + 1..=l + m {
        ratio *= k as f64;
    }
    value / ratio.sqrt()
}

/// Value of one harmonic term at a unit vector.
pub fn harmonic_value(n: usize, term: &HarmonicTerm, x: &[f64]) -> f64 {
    let z = x[n];
    if term.m == 0 {
        return term.amplitude * zonal(n, term.l, z);
    }
    let m = term.m.unsigned_abs() as usize;
    let phi = x[1].atan2(x[0]);
    let angular = if term.m > 0 {
        (m as f64 * phi).cos()
    } else {
        (m as f64 * phi).sin()
    };
    term.amplitude * ferrers(term.l, m, z) * angular
}

fn zonal_extended(n: usize, l: usize, t: Dd) -> Dd {
    let lambda = 0.5 * (n as f64 - 1.0);
    let gegenbauer = |x: Dd| {
        let (mut prev, mut cur) = (Dd::from(1.0), x * (2.0 * lambda));
        if l == 0 {
            return prev;
        }
        for k in 1..l {
            let k = k as f64;
            let next =
                (x * cur * (2.0 * (k + lambda)) - prev * (k + 2.0 * lambda - 1.0)) / (k + 1.0);
            prev = cur;
            cur = next;
        }
        cur
    };
    div(gegenbauer(t), gegenbauer(Dd::from(1.0)))
}

fn ferrers_extended(l: usize, m: usize, x: Dd, s: Dd) -> Dd {
    let mut pmm = Dd::from(1.0);
    for k in 1..=m {
        pmm = pmm * s * (2 * k - 1) as f64;
    }
    let value = if l == m {
        pmm
    } else {
        let mut prev = pmm;
        let mut cur = x * pmm * (2 * m + 1) as f64;
        for k in m + 2..=l {
            let next =
                ((x * cur) * (2 * k - 1) as f64 - prev * (k + m - 1) as f64) / (k - m) as f64;
            prev = cur;
            cur = next;
        }
        cur
    };
    let mut ratio = Dd::from(1.0);
    for k in l - m + 1..=l + m {
        ratio *= k as f64;
    }
    div(value, ratio.sqrt())
}

/// Samples of the profile in double-double precision, for the families whose
/// profile is a polynomial in the node coordinates (spheres and harmonic
/// perturbations); `None` for the others.
pub fn extended_samples(spec: &SurfaceSpec, ext: &ExtendedGrid) -> Result<Option<Vec<Dd>>> {
    spec.validate()?;
    let n = spec.n;
    let len = ext.grid().len();
    Ok(match &spec.kind {
        SurfaceKind::Sphere { t } => Some(vec![Dd::from(*t); len]),
        SurfaceKind::HarmonicPerturbation { terms } => Some(
            (0..len)
                .map(|node| {
                    let (cos, sin) = ext.trig(node);
                    // the last coordinate is the cosine of the first polar angle
                    let (z, s) = (cos[0], sin[0]);
                    let (cphi, sphi) = (cos[n - 1], sin[n - 1]);
                    terms.iter().fold(Dd::from(0.0), |acc, term| {
                        if term.m == 0 {
                            return acc + zonal_extended(n, term.l, z) * term.amplitude;
                        }
                        let m = term.m.unsigned_abs() as usize;
                        let (mut c, mut si) = (Dd::from(1.0), Dd::from(0.0));
                        for _ in 0..m {
                            (c, si) = (c * cphi - si * sphi, c * sphi + si * cphi);
                        }
                        let angular = if term.m > 0 { c } else { si };
                        acc + ferrers_extended(term.l, m, z, s) * angular * term.amplitude
                    })
                })
                .collect(),
        ),
        _ => None,
    })
}

/// A closed-form log-radial profile `f(x)` on the unit sphere.
pub type ProfileFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Zonal terms `c · Z_ℓ(⟨x, axis⟩)` about arbitrary axes.
#[derive(Debug, Clone)]
struct RandomProfile {
    terms: Vec<(usize, Vec<f64>, f64)>,
}

impl RandomProfile {
    fn draw(n: usize, seed: u64, band: usize, amplitude: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut terms = Vec::new();
        for l in 1..=band {
            for _ in 0..2 {
                let mut axis: Vec<f64> = (0..=n)
                    .map(|_| rng.sample::<f64, _>(StandardNormal))
                    .collect();
                let r = axis.iter().map(|v| v * v).sum::<f64>().sqrt();
                axis.iter_mut().for_each(|v| *v /= r);
                let c: f64 = rng.sample::<f64, _>(StandardNormal) * amplitude / (l as f64).powi(3);
                terms.push((l, axis, c));
            }
        }
        RandomProfile { terms }
    }

    fn value(&self, n: usize, scale: f64, x: &[f64]) -> f64 {
        scale
            * self
                .terms
                .iter()
                .map(|(l, axis, c)| {
                    let t: f64 = axis.iter().zip(x).map(|(a, b)| a * b).sum();
                    c * zonal(n, *l, t.clamp(-1.0, 1.0))
                })
                .sum::<f64>()
    }
}

/// The closed-form profile of a spec. Random surfaces resolve their convexity
/// scaling on the spec's grid first, so the profile matches [`generate`].
pub fn profile(spec: &SurfaceSpec) -> Result<ProfileFn> {
    spec.validate()?;
    let n = spec.n;
    Ok(match spec.kind.clone() {
        SurfaceKind::Sphere { t } => Arc::new(move |_| t),
        SurfaceKind::TranslatedSphere { a } => {
            let a2: f64 = a.iter().map(|v| v * v).sum();
            Arc::new(move |x: &[f64]| {
                let za: f64 = x.iter().zip(&a).map(|(p, q)| p * q).sum();
                (za + (1.0 - a2 + za * za).sqrt()).ln()
            })
        }
        SurfaceKind::Ellipsoid { axes } => Arc::new(move |x: &[f64]| {
            let q: f64 = x.iter().zip(&axes).map(|(v, a)| v * v / (a * a)).sum();
            -0.5 * q.ln()
        }),
        SurfaceKind::HarmonicPerturbation { terms } => {
            Arc::new(move |x: &[f64]| terms.iter().map(|t| harmonic_value(n, t, x)).sum())
        }
        SurfaceKind::RandomConvex {
            seed,
            band,
            amplitude,
        } => {
            let grid = SphereGrid::new(n, &spec.shape)?;
            let (random, scale) = convex_scaling(&grid, seed, band, amplitude)?;
            Arc::new(move |x: &[f64]| random.value(n, scale, x))
        }
    })
}

fn convex_scaling(
    grid: &Arc<SphereGrid>,
    seed: u64,
    band: usize,
    amplitude: f64,
) -> Result<(RandomProfile, f64)> {
    let n = grid.n();
    let random = RandomProfile::draw(n, seed, band, amplitude);
    let mut scale = 1.0;
    for _ in 0..MAX_RESAMPLES {
        let f = ScalarField::from_fn(grid.clone(), |x| random.value(n, scale, x));
        let surface = RadialSurface::new(f, "")?;
        if convexity_check(&surface.geometry()?).is_convex {
            return Ok((random, scale));
        }
        scale *= 0.8;
    }
    Err(Error::ResampleExhausted(MAX_RESAMPLES))
}

/// Samples the spec's profile on its grid.
pub fn generate(spec: &SurfaceSpec) -> Result<RadialSurface> {
    let grid = SphereGrid::new(spec.n, &spec.shape)?;
    let f = profile(spec)?;
    RadialSurface::new(ScalarField::from_fn(grid, |x| f(x)), spec.provenance())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extended_samples_match_double_precision() {
        for terms in [
            vec![HarmonicTerm {
                l: 2,
                m: 0,
                amplitude: 0.1,
            }],
            vec![
                HarmonicTerm {
                    l: 3,
                    m: 2,
                    amplitude: 0.05,
                },
                HarmonicTerm {
                    l: 4,
                    m: -3,
                    amplitude: 0.02,
                },
            ],
        ] {
            let spec =
                SurfaceSpec::new(SurfaceKind::HarmonicPerturbation { terms }, 2, vec![10, 20]);
            let s = generate(&spec).unwrap();
            let ext = ExtendedGrid::new(s.grid());
            let v = extended_samples(&spec, &ext).unwrap().unwrap();
            for (a, b) in v.iter().zip(s.f().values()) {
                assert!((a.hi() - b).abs() < 1e-15);
            }
        }
        let spec = SurfaceSpec::ellipsoid_family(2, 0.1);
        let s = generate(&spec).unwrap();
        assert!(extended_samples(&spec, &ExtendedGrid::new(s.grid()))
            .unwrap()
            .is_none());
    }

    #[test]
    fn zonal_matches_legendre_and_gegenbauer() {
        let t = 0.3f64;
        assert!((zonal(2, 2, t) - 0.5 * (3.0 * t * t - 1.0)).abs() < 1e-15);
        assert!((zonal(2, 3, t) - 0.5 * (5.0 * t.powi(3) - 3.0 * t)).abs() < 1e-15);
        // n = 3: C_2^1(t) = 4t² − 1, C_2^1(1) = 3
        assert!((zonal(3, 2, t) - (4.0 * t * t - 1.0) / 3.0).abs() < 1e-15);
        assert_eq!(zonal(3, 0, t), 1.0);
    }

    #[test]
    fn ferrers_values() {
        let x = 0.4f64;
        let s = (1.0 - x * x).sqrt();
        // P_2^1 = 3 x s, normalized by sqrt(1/3!)
        assert!((ferrers(2, 1, x) - 3.0 * x * s / 6f64.sqrt()).abs() < 1e-15);
        assert!((ferrers(2, 2, x) - 3.0 * s * s / 24f64.sqrt()).abs() < 1e-15);
        assert!((ferrers(3, 0, x) - zonal(2, 3, x)).abs() < 1e-15);
    }

    #[test]
    fn generated_profiles() {
        let s = generate(&SurfaceSpec::sphere(2)).unwrap();
        assert!(s.f().values().iter().all(|v| *v == 0.0));
        let spec = SurfaceSpec::new(
            SurfaceKind::Ellipsoid {
                axes: vec![1.0, 1.0, 1.05],
            },
            2,
            vec![8, 16],
        );
        let s = generate(&spec).unwrap();
        for node in 0..s.grid().len() {
            let x = s.grid().point(node);
            let expect = -0.5 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] / (1.05f64 * 1.05)).ln();
            assert_eq!(s.f().values()[node], expect);
        }
    }

    #[test]
    fn random_convex_is_deterministic_and_convex() {
        let spec = SurfaceSpec::new(
            SurfaceKind::RandomConvex {
                seed: 7,
                band: 6,
                amplitude: 0.3,
            },
            2,
            vec![16, 32],
        );
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a.f().values(), b.f().values());
        assert!(convexity_check(&a.geometry().unwrap()).is_convex);
    }

    #[test]
    fn rejects_invalid_specs() {
        let bad = SurfaceSpec::new(
            SurfaceKind::TranslatedSphere {
                a: vec![1.2, 0.0, 0.0],
            },
            2,
            vec![8, 8],
        );
        assert!(matches!(generate(&bad), Err(Error::InvalidSpec(_))));
        let bad = SurfaceSpec::new(
            SurfaceKind::HarmonicPerturbation {
                terms: vec![HarmonicTerm {
                    l: 2,
                    m: 1,
                    amplitude: 0.1,
                }],
            },
            3,
            vec![6, 6, 8],
        );
        assert!(generate(&bad).is_err());
        let bad = SurfaceSpec::new(
            SurfaceKind::Ellipsoid {
                axes: vec![1.0, -1.0, 1.0],
            },
            2,
            vec![8, 8],
        );
        assert!(generate(&bad).is_err());
    }
}
