//! Globally adaptive Gauss–Kronrod (7, 15) integration.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::QuadratureError;

/// Kronrod abscissae on [-1, 1], non-negative half; odd indices are the Gauss points.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One panel's contribution. `aux` is a companion integrand carried through the same
/// nodes; it does not drive refinement.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Panel {
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
    pub aux: f64,
    pub error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    // Largest error first; ties go to the leftmost panel so the refinement order is fixed.
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}

pub(crate) fn kronrod_panel<F>(f: &F, lo: f64, hi: f64) -> Result<Panel, QuadratureError>
where
    F: Fn(f64) -> (f64, f64),
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let eval = |x: f64| -> Result<(f64, f64), QuadratureError> {
        let (v, a) = f(x);
        if v.is_finite() && a.is_finite() {
            Ok((v, a))
        } else {
            Err(QuadratureError::NonFinite { at: x })
        }
    };

    let (fc, ac) = eval(center)?;
    let mut kronrod = WGK[7] * fc;
    let mut aux = WGK[7] * ac;
    let mut gauss = WG[3] * fc;
    let mut abs_sum = WGK[7] * fc.abs();
    for j in 0..7 {
        let dx = half * XGK[j];
        let (f1, a1) = eval(center - dx)?;
        let (f2, a2) = eval(center + dx)?;
        kronrod += WGK[j] * (f1 + f2);
        aux += WGK[j] * (a1 + a2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kronrod * half;
    let roundoff = 50.0 * f64::EPSILON * abs_sum * half.abs();
    let error = ((kronrod - gauss) * half).abs().max(roundoff);
    Ok(Panel { lo, hi, value, aux: aux * half, error })
}

pub(crate) struct Adaptive {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
    pub converged: bool,
}

/// Adaptive integration over `[lo, hi]` with the interior points of `breaks` as
/// mandatory initial splits. `extra_error` maps the running `(value, aux)` totals to any
/// additional error that should count against the tolerance.
#[allow(clippy::too_many_arguments)]
pub(crate) fn adaptive<F, E>(
    f: &F,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_panels: usize,
    extra_error: E,
) -> Result<Adaptive, QuadratureError>
where
    F: Fn(f64) -> (f64, f64),
    E: Fn(f64, f64) -> f64,
{
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&b| b > lo && b < hi).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(lo);
    edges.extend(cuts);
    edges.push(hi);

    let mut heap = BinaryHeap::new();
    for w in edges.windows(2) {
        if w[1] > w[0] {
            heap.push(kronrod_panel(f, w[0], w[1])?);
        }
    }

    let totals = |heap: &BinaryHeap<Panel>| {
        let mut panels: Vec<&Panel> = heap.iter().collect();
        panels.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        panels.iter().fold((0.0, 0.0, 0.0), |(v, a, e), p| (v + p.value, a + p.aux, e + p.error))
    };

    loop {
        let (value, aux, error) = totals(&heap);
        let extra = extra_error(value, aux);
        let tol = (rel_tol * value.abs()).max(abs_tol);
        let panels = heap.len();
        let done = |converged| Adaptive { value, error: error + extra, panels, converged };
        if error + extra <= tol {
            return Ok(done(true));
        }
        if heap.len() >= max_panels || extra > tol {
            return Ok(done(false));
        }
        let Some(worst) = heap.pop() else {
            return Ok(done(true));
        };
        let mid = 0.5 * (worst.lo + worst.hi);
        if !(mid > worst.lo && mid < worst.hi) {
            // Panel is at floating-point resolution; further bisection is meaningless.
            heap.push(worst);
            let (value, _, error) = totals(&heap);
            return Ok(Adaptive { value, error: error + extra, panels: heap.len(), converged: false });
        }
        heap.push(kronrod_panel(f, worst.lo, mid)?);
        heap.push(kronrod_panel(f, mid, worst.hi)?);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_interval_length() {
        let k: f64 = WGK[7] + 2.0 * WGK[..7].iter().sum::<f64>();
        let g: f64 = WG[3] + 2.0 * WG[..3].iter().sum::<f64>();
        assert!((k - 2.0).abs() < 1e-15);
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn single_panel_is_exact_through_degree_thirteen() {
        for deg in 0..=13 {
            let p = kronrod_panel(&|x: f64| (x.powi(deg), 0.0), 0.0, 1.0).unwrap();
            let exact = 1.0 / (deg as f64 + 1.0);
            assert!((p.value - exact).abs() < 1e-13 * exact, "degree {deg}");
            assert!(p.error < 1e-13, "degree {deg}: error {}", p.error);
        }
    }
}
