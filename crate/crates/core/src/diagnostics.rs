//! Regularity measurements on solved fields: power-law fits, limits of second
//! derivatives at `x = 0`, Richardson extrapolation, parabolic norms, decay
//! ladders, the sonic jump and the two-sequence probe near `P₁`.

use alloc::vec;
use alloc::vec::Vec;

use crate::degenerate_solver::ScalarField2D;
use crate::error::{Error, Result};
use crate::math;
use crate::reflection_config::ReflectionConfiguration;

/// Columns used by the near-boundary extrapolation.
pub const LIMIT_COLUMNS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PowerFit {
    pub y: f64,
    pub p: f64,
    pub c: f64,
    pub rms: f64,
    pub samples: usize,
}

/// Default fit window `[4·x₁, x_max/4]`.
pub fn default_window(field: &ScalarField2D) -> (f64, f64) {
    let xm = field.xs[field.nx() - 1];
    (4.0 * field.xs[1], 0.25 * xm)
}

/// Least-squares fit of `ln ψ = ln c + p ln x` along column-row `j`.
pub fn fit_power_law(field: &ScalarField2D, j: usize, window: (f64, f64)) -> Result<PowerFit> {
    let mut lx = Vec::new();
    let mut lv = Vec::new();
    for i in 0..field.nx() {
        let x = field.xs[i];
        if x >= window.0 && x <= window.1 && x > 0.0 {
            let v = field.at(i, j);
            if !(v > 0.0) {
                return Err(Error::NonpositiveSamples);
            }
            lx.push(math::ln(x));
            lv.push(math::ln(v));
        }
    }
    let n = lx.len();
    if n < 8 {
        return Err(Error::InsufficientResolution);
    }
    let mx = lx.iter().sum::<f64>() / n as f64;
    let my = lv.iter().sum::<f64>() / n as f64;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for k in 0..n {
        sxx += (lx[k] - mx) * (lx[k] - mx);
        sxy += (lx[k] - mx) * (lv[k] - my);
    }
    let p = sxy / sxx;
    let lc = my - p * mx;
    let mut ss = 0.0;
    for k in 0..n {
        let e = lv[k] - (lc + p * lx[k]);
        ss += e * e;
    }
    Ok(PowerFit { y: field.y(0, j), p, c: math::exp(lc), rms: math::sqrt(ss / n as f64), samples: n })
}

/// Solves the `m × m` normal equations of a least-squares problem.
fn lstsq(rows: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let m = rows[0].len();
    let mut a = vec![vec![0.0; m + 1]; m];
    for (r, &b) in rows.iter().zip(rhs) {
        for p in 0..m {
            for q in 0..m {
                a[p][q] += r[p] * r[q];
            }
            a[p][m] += r[p] * b;
        }
    }
    for col in 0..m {
        let piv = (col..m).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        a.swap(col, piv);
        let d = a[col][col];
        if d == 0.0 {
            return None;
        }
        for row in 0..m {
            if row != col {
                let f = a[row][col] / d;
                for k in col..=m {
                    a[row][k] -= f * a[col][k];
                }
            }
        }
    }
    Some((0..m).map(|k| a[k][m] / a[k][k]).collect())
}

/// Intercept at `x = 0` of a fit of `v(x)` on `{1, x, x ln x}`.
pub fn intercept_with_log(xs: &[f64], vs: &[f64]) -> Option<f64> {
    let x0 = xs[0];
    let rows: Vec<Vec<f64>> = xs
        .iter()
        .map(|&x| {
            let t = x / x0;
            vec![1.0, t, t * math::ln(t)]
        })
        .collect();
    lstsq(&rows, vs).map(|c| c[0])
}

/// Intercept at `x = 0` of a linear fit.
pub fn intercept_linear(xs: &[f64], vs: &[f64]) -> Option<f64> {
    let x0 = xs[0];
    let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![1.0, x / x0]).collect();
    lstsq(&rows, vs).map(|c| c[0])
}

/// Limits of second derivatives of `ψ` at `x = 0` along one station.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StationLimit {
    pub s: f64,
    pub j: usize,
    pub psi_xx: f64,
    pub psi_xy: f64,
    pub psi_yy: f64,
    /// Limit of `2ψ/x²`.
    pub ratio: f64,
}

fn check_resolution(field: &ScalarField2D) -> Result<()> {
    let xm = field.xs[field.nx() - 1];
    let fine = field.xs.iter().filter(|&&x| x > 0.0 && x <= xm / 100.0).count();
    if fine < 4 || field.nx() < LIMIT_COLUMNS + 2 {
        return Err(Error::InsufficientResolution);
    }
    Ok(())
}

/// Extrapolates `ψ_xx, ψ_xy, ψ_yy` and `2ψ/x²` to `x = 0` at row `j`.
pub fn station_limit(field: &ScalarField2D, j: usize) -> Result<StationLimit> {
    check_resolution(field)?;
    let cols: Vec<usize> = (1..=LIMIT_COLUMNS).collect();
    let xs: Vec<f64> = cols.iter().map(|&i| field.xs[i]).collect();
    let jets: Vec<_> = cols.iter().map(|&i| field.jet(i, j)).collect();
    let fit = |v: Vec<f64>| intercept_with_log(&xs, &v).ok_or(Error::InsufficientResolution);
    Ok(StationLimit {
        s: field.ss[j],
        j,
        psi_xx: fit(jets.iter().map(|t| t.xx).collect())?,
        psi_xy: fit(jets.iter().map(|t| t.xy).collect())?,
        psi_yy: fit(jets.iter().map(|t| t.yy).collect())?,
        ratio: fit(jets.iter().zip(&xs).map(|(t, &x)| 2.0 * t.v / (x * x)).collect())?,
    })
}

/// Station limits at the interior rows nearest each requested `s`.
pub fn sonic_limit_estimate(field: &ScalarField2D, stations: &[f64]) -> Result<Vec<StationLimit>> {
    stations.iter().map(|&s| station_limit(field, field.nearest_s(s))).collect()
}

/// Every interior row, for use when no station list is given.
pub fn interior_stations(field: &ScalarField2D, margin: usize) -> Vec<f64> {
    let ny = field.ny();
    (margin..ny - margin).map(|j| field.ss[j]).collect()
}

/// Three-grid extrapolation with refinement ratio 2.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RichardsonEstimate {
    pub grids: [(usize, usize); 3],
    pub values: [f64; 3],
    pub value: f64,
    pub order: f64,
    /// The measured order fell outside `[1, 4]` and 2 was used.
    pub order_fallback: bool,
}

pub fn richardson(grids: [(usize, usize); 3], values: [f64; 3]) -> RichardsonEstimate {
    let d1 = values[1] - values[0];
    let d2 = values[2] - values[1];
    let measured = if d2 != 0.0 && d1 != 0.0 && (d1 / d2) > 0.0 { math::log2(d1 / d2) } else { f64::NAN };
    let (order, fallback) = if measured >= 1.0 && measured <= 4.0 { (measured, false) } else { (2.0, true) };
    let value = values[2] + d2 / (math::powf(2.0, order) - 1.0);
    RichardsonEstimate { grids, values, value, order, order_fallback: fallback }
}

/// Station limit extrapolated across a grid triplet.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExtrapolatedStation {
    pub s: f64,
    pub psi_xx: RichardsonEstimate,
    pub psi_xy: RichardsonEstimate,
    pub psi_yy: RichardsonEstimate,
    pub ratio: RichardsonEstimate,
}

pub fn sonic_limit_triplet(fields: [&ScalarField2D; 3], stations: &[f64]) -> Result<Vec<ExtrapolatedStation>> {
    let grids = [
        (fields[0].nx(), fields[0].ny()),
        (fields[1].nx(), fields[1].ny()),
        (fields[2].nx(), fields[2].ny()),
    ];
    let mut out = Vec::with_capacity(stations.len());
    for &s in stations {
        let l0 = station_limit(fields[0], fields[0].nearest_s(s))?;
        let l1 = station_limit(fields[1], fields[1].nearest_s(s))?;
        let l2 = station_limit(fields[2], fields[2].nearest_s(s))?;
        let r = |g: fn(&StationLimit) -> f64| richardson(grids, [g(&l0), g(&l1), g(&l2)]);
        out.push(ExtrapolatedStation {
            s: l2.s,
            psi_xx: r(|l| l.psi_xx),
            psi_xy: r(|l| l.psi_xy),
            psi_yy: r(|l| l.psi_yy),
            ratio: r(|l| l.ratio),
        });
    }
    Ok(out)
}

/// `Σ_{k+l≤2} sup x^{k+l/2−2}|∂ₓᵏ∂ᵧˡψ|`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ParabolicNorm {
    pub value: f64,
    /// `(k, l, sup)` per term.
    pub terms: Vec<(u8, u8, f64)>,
    pub x_cut: f64,
}

impl ParabolicNorm {
    pub fn term(&self, k: u8, l: u8) -> f64 {
        self.terms.iter().find(|t| t.0 == k && t.1 == l).map(|t| t.2).unwrap_or(f64::NAN)
    }
}

const LADDER: [(u8, u8); 6] = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];

fn jet_component(t: &crate::degenerate_solver::Jet, k: u8, l: u8) -> f64 {
    match (k, l) {
        (0, 0) => t.v,
        (1, 0) => t.x,
        (0, 1) => t.y,
        (2, 0) => t.xx,
        (1, 1) => t.xy,
        _ => t.yy,
    }
}

/// Parabolic norm over nodes `0 < x ≤ x_cut`; defaults to half the `x` extent.
pub fn parabolic_norm(field: &ScalarField2D, x_cut: Option<f64>) -> ParabolicNorm {
    let xm = field.xs[field.nx() - 1];
    let cut = x_cut.unwrap_or(0.5 * xm);
    let mut terms: Vec<(u8, u8, f64)> = LADDER.iter().map(|&(k, l)| (k, l, 0.0)).collect();
    for i in 1..field.nx() - 1 {
        let x = field.xs[i];
        if x > cut {
            break;
        }
        for j in 0..field.ny() {
            let t = field.jet(i, j);
            for term in terms.iter_mut() {
                let w = math::powf(x, term.0 as f64 + 0.5 * term.1 as f64 - 2.0);
                term.2 = term.2.max(w * jet_component(&t, term.0, term.1).abs());
            }
        }
    }
    ParabolicNorm { value: terms.iter().map(|t| t.2).sum(), terms, x_cut: cut }
}

/// Smallest constants in `|DₓⁱDᵧʲW| ≤ C x^{2+α−i−j/2}`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecayReport {
    pub alpha: f64,
    /// `(i, j, C, attained at the finest column)`.
    pub constants: Vec<(u8, u8, f64, bool)>,
    /// No channel attains its supremum at the first interior column.
    pub ladder_ok: bool,
}

pub fn decay_bound_check(w: &ScalarField2D, alpha: f64, x_cut: Option<f64>) -> DecayReport {
    let xm = w.xs[w.nx() - 1];
    let cut = x_cut.unwrap_or(0.5 * xm);
    let mut constants = Vec::new();
    for &(k, l) in LADDER.iter() {
        let mut best = 0.0;
        let mut at_first = false;
        for i in 1..w.nx() - 1 {
            let x = w.xs[i];
            if x > cut {
                break;
            }
            let scale = math::powf(x, 2.0 + alpha - k as f64 - 0.5 * l as f64);
            for j in 0..w.ny() {
                let v = jet_component(&w.jet(i, j), k, l).abs() / scale;
                if v > best {
                    best = v;
                    at_first = i == 1;
                }
            }
        }
        constants.push((k, l, best, at_first && best > 0.0));
    }
    let ladder_ok = constants.iter().all(|c| !c.3);
    DecayReport { alpha, constants, ladder_ok }
}

/// Discrete parabolic Hölder seminorm of `ψ_xx` on neighbouring nodes with `x ≤ x_cut`.
pub fn holder_seminorm_xx(field: &ScalarField2D, alpha: f64, x_cut: Option<f64>) -> f64 {
    let xm = field.xs[field.nx() - 1];
    let cut = x_cut.unwrap_or(0.5 * xm);
    let mut best = 0.0f64;
    for i in 1..field.nx() - 2 {
        if field.xs[i + 1] > cut {
            break;
        }
        for j in 0..field.ny() - 1 {
            let t = field.jet(i, j).xx;
            for (ii, jj) in [(i + 1, j), (i, j + 1)] {
                let (dx, dy) = (field.xs[ii] - field.xs[i], (field.y(ii, jj) - field.y(i, j)).abs());
                let d = dx + math::sqrt(field.xs[ii]) * dy;
                if d > 0.0 {
                    best = best.max((field.jet(ii, jj).xx - t).abs() / math::powf(d, alpha));
                }
            }
        }
    }
    best
}

/// Jump of `D_rr φ` across the sonic arc.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct JumpEstimate {
    pub value: f64,
    pub stations: Vec<(f64, f64)>,
    pub max_deviation: f64,
    pub expected: f64,
}

/// Interior stations used for the jump.
pub const JUMP_STATIONS: [f64; 6] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6];

/// Inner minus outer `D_rr φ`; the outer side is `D_rr φ₂ = −1`, so this is the
/// extrapolated `ψ_xx(0⁺, ·)` averaged over interior stations.
pub fn jump_estimate(field: &ScalarField2D, config: &ReflectionConfiguration) -> Result<JumpEstimate> {
    let limits = sonic_limit_estimate(field, &JUMP_STATIONS)?;
    jump_from_limits(limits.iter().map(|l| (l.s, l.psi_xx)).collect(), 1.0 / (config.gas.gamma + 1.0))
}

/// Jump from per-station limits already extrapolated across grids.
pub fn jump_from_limits(stations: Vec<(f64, f64)>, expected: f64) -> Result<JumpEstimate> {
    if stations.is_empty() {
        return Err(Error::InsufficientResolution);
    }
    let outer = -1.0;
    let mean = stations.iter().map(|s| (-1.0 + s.1) - outer).sum::<f64>() / stations.len() as f64;
    let dev = stations.iter().map(|s| (s.1 - expected).abs()).fold(0.0, f64::max);
    Ok(JumpEstimate { value: mean, stations, max_deviation: dev, expected })
}

/// The two families of points approaching `P₁`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TwoSequenceProbe {
    /// `(s, y, limit of ψ_xx)` with `y = s·f̂(0) → f̂(0)⁻`.
    pub sonic_adjacent: Vec<(f64, f64, f64)>,
    pub sonic_adjacent_limit: f64,
    /// `(x, ψ_xx(x, f̂(x) − (ω/10)x))`.
    pub shock_adjacent: Vec<(f64, f64)>,
    pub shock_adjacent_limit: f64,
    /// `(x, ψ_x(x, f̂(x))/x)`.
    pub shock_psi_x_over_x: Vec<(f64, f64)>,
    pub gap: f64,
    pub omega: f64,
    pub expected_sonic: f64,
    pub label: &'static str,
}

/// Sonic-adjacent stations, increasing toward `P₁`.
pub const PROBE_STATIONS: [f64; 6] = [0.25, 0.5, 0.6, 0.75, 0.85, 0.9];

pub fn two_sequence_probe(field: &ScalarField2D, config: &ReflectionConfiguration, omega: Option<f64>) -> Result<TwoSequenceProbe> {
    let map = field.mapping.as_ref().ok_or(Error::InsufficientResolution)?;
    check_resolution(field)?;
    let om = omega.unwrap_or_else(|| map.fp.iter().cloned().fold(f64::INFINITY, f64::min));
    let f0 = map.f[0];
    let mut sonic = Vec::new();
    for &s in PROBE_STATIONS.iter() {
        let l = station_limit(field, field.nearest_s(s))?;
        sonic.push((l.s, l.s * f0, l.psi_xx));
    }
    let sonic_limit = sonic.last().map(|v| v.2).unwrap_or(f64::NAN);
    let ny = field.ny();
    let hs = field.ss[1] - field.ss[0];
    let mut shock = Vec::new();
    let mut trace = Vec::new();
    for i in 1..=LIMIT_COLUMNS {
        let x = field.xs[i];
        let s = 1.0 - om * x / (10.0 * map.f[i]);
        let jf = math::floor((s - field.ss[0]) / hs).max(0.0) as usize;
        let j0 = jf.min(ny - 2);
        let t = (s - field.ss[j0]) / hs;
        let v = (1.0 - t) * field.jet(i, j0).xx + t * field.jet(i, j0 + 1).xx;
        shock.push((x, v));
        trace.push((x, field.jet(i, ny - 1).x / x));
    }
    let xs: Vec<f64> = shock.iter().map(|v| v.0).collect();
    let vs: Vec<f64> = shock.iter().map(|v| v.1).collect();
    let shock_limit = intercept_linear(&xs, &vs).ok_or(Error::InsufficientResolution)?;
    Ok(TwoSequenceProbe {
        sonic_adjacent: sonic,
        sonic_adjacent_limit: sonic_limit,
        shock_adjacent: shock,
        shock_adjacent_limit: shock_limit,
        shock_psi_x_over_x: trace,
        gap: sonic_limit - shock_limit,
        omega: om,
        expected_sonic: 1.0 / (config.gas.gamma + 1.0),
        label: "surrogate-boundary",
    })
}

/// Aggregate of the measurements on one field.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RegularityReport {
    pub fits: Vec<PowerFit>,
    pub limits: Vec<StationLimit>,
    pub parabolic: ParabolicNorm,
    pub holder_xx: f64,
    pub holder_alpha: f64,
    pub jump: Option<JumpEstimate>,
    pub probe: Option<TwoSequenceProbe>,
}

pub fn regularity_report(field: &ScalarField2D, config: Option<&ReflectionConfiguration>, stations: &[f64]) -> Result<RegularityReport> {
    let window = default_window(field);
    let mut fits = Vec::new();
    for &s in stations {
        if let Ok(f) = fit_power_law(field, field.nearest_s(s), window) {
            fits.push(f);
        }
    }
    let limits = sonic_limit_estimate(field, stations)?;
    let xm = field.xs[field.nx() - 1];
    let parabolic = parabolic_norm(field, Some(0.5 * xm));
    let holder_alpha = 0.5;
    let holder_xx = holder_seminorm_xx(field, holder_alpha, Some(0.5 * xm));
    let (jump, probe) = match config {
        Some(c) => (Some(jump_estimate(field, c)?), two_sequence_probe(field, c, None).ok()),
        None => (None, None),
    };
    Ok(RegularityReport { fits, limits, parabolic, holder_xx, holder_alpha, jump, probe })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degenerate_solver::{graded_nodes, uniform_nodes, Grading};

    fn synthetic(g: impl Fn(f64, f64) -> f64) -> ScalarField2D {
        let xs = graded_nodes(0.5, 129, Grading::Geometric { q: 0.95 }).unwrap();
        ScalarField2D::from_fn(xs, uniform_nodes(-1.0, 1.0, 21), Grading::Geometric { q: 0.95 }, g)
    }

    #[test]
    fn exact_power_laws() {
        let f = synthetic(|x, _| 3.0 * x * x);
        let fit = fit_power_law(&f, 10, default_window(&f)).unwrap();
        assert!((fit.p - 2.0).abs() < 1e-6 && (fit.c - 3.0).abs() < 1e-6);
        let g = synthetic(|x, _| libm::pow(x, 1.5));
        let fit = fit_power_law(&g, 3, (0.01, 0.4)).unwrap();
        assert!((fit.p - 1.5).abs() < 1e-6);
        let z = synthetic(|_, _| 0.0);
        assert_eq!(fit_power_law(&z, 3, (0.01, 0.4)), Err(Error::NonpositiveSamples));
    }

    #[test]
    fn quadratic_field_limits() {
        let a = 2.4;
        let f = synthetic(|x, _| x * x / (2.0 * a));
        for l in sonic_limit_estimate(&f, &[-0.5, 0.0, 0.5]).unwrap() {
            assert!((l.psi_xx - 1.0 / a).abs() < 1e-9);
            assert!(l.psi_xy.abs() < 1e-9 && l.psi_yy.abs() < 1e-9);
            assert!((l.ratio - 1.0 / a).abs() < 1e-9);
        }
        let n = parabolic_norm(&f, None);
        assert!((n.term(2, 0) - 1.0 / a).abs() < 1e-9);
        assert!(n.value.is_finite());
    }

    #[test]
    fn three_halves_power_is_unbounded_in_parabolic_norm() {
        let coarse = {
            let xs = graded_nodes(0.5, 65, Grading::Geometric { q: 0.95 }).unwrap();
            ScalarField2D::from_fn(xs, uniform_nodes(-1.0, 1.0, 9), Grading::Uniform, |x, _| libm::pow(x, 1.5))
        };
        let fine = synthetic(|x, _| libm::pow(x, 1.5));
        let growth = parabolic_norm(&fine, None).term(2, 0) / parabolic_norm(&coarse, None).term(2, 0);
        assert!(growth > 1.3, "{growth}");
        let d = decay_bound_check(&fine.map_values(|_, _, v| -v), 0.5, None);
        assert!(!d.ladder_ok);
    }

    #[test]
    fn decay_of_zero_field() {
        let z = synthetic(|_, _| 0.0);
        let d = decay_bound_check(&z, 0.5, None);
        assert!(d.ladder_ok && d.constants.iter().all(|c| c.2 == 0.0));
    }

    #[test]
    fn richardson_order_and_value() {
        let r = richardson([(1, 1), (2, 2), (4, 4)], [1.0 + 0.16, 1.0 + 0.04, 1.0 + 0.01]);
        assert!((r.order - 2.0).abs() < 1e-12 && !r.order_fallback);
        assert!((r.value - 1.0).abs() < 1e-12);
        let flat = richardson([(1, 1), (2, 2), (4, 4)], [1.0, 1.0, 1.0]);
        assert!(flat.order_fallback && flat.value == 1.0);
    }

    #[test]
    fn log_intercept_is_exact_on_basis() {
        let xs: Vec<f64> = (1..=8).map(|k| 0.001 * k as f64).collect();
        let vs: Vec<f64> = xs.iter().map(|&x| 0.4 - 2.0 * x + 5.0 * x * libm::log(x)).collect();
        assert!((intercept_with_log(&xs, &vs).unwrap() - 0.4).abs() < 1e-10);
    }

    #[test]
    fn smooth_extension_has_no_jump() {
        let f = synthetic(|x, _| x * x * x);
        let limits = sonic_limit_estimate(&f, &JUMP_STATIONS).unwrap();
        let j = jump_from_limits(limits.iter().map(|l| (l.s, l.psi_xx)).collect(), 0.0).unwrap();
        assert!(j.value.abs() < 1e-3, "{}", j.value);
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let xs = graded_nodes(0.5, 33, Grading::Uniform).unwrap();
        let f = ScalarField2D::from_fn(xs, uniform_nodes(0.0, 1.0, 5), Grading::Uniform, |x, _| x * x);
        assert_eq!(station_limit(&f, 2), Err(Error::InsufficientResolution));
    }
}
