//! Adaptive Gauss-Kronrod quadrature, used as an independent integral oracle
//! by the quadrature-error probe and the manufactured-solution checks.

// 15-point Kronrod nodes on [-1, 1] (positive half) and weights, with the
// embedded 7-point Gauss weights. Standard QUADPACK constants.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// Returns (integral, error estimate, integral of |f|).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kronrod = WGK[7] * fc;
    let mut resabs = WGK[7] * fc.abs();
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = half * XGK[i];
        let (lo, hi) = (f(mid - dx), f(mid + dx));
        kronrod += WGK[i] * (lo + hi);
        resabs += WGK[i] * (lo.abs() + hi.abs());
        if i % 2 == 1 {
            gauss += WG[i / 2] * (lo + hi);
        }
    }
    kronrod *= half;
    gauss *= half;
    resabs *= half.abs();
    (kronrod, (kronrod - gauss).abs(), resabs)
}

/// Shared evaluation budget: hard cap on gk15 panels per top-level call, so a
/// pathological integrand degrades accuracy instead of running away.
struct Budget(std::cell::Cell<u32>);

impl Budget {
    fn take(&self) -> bool {
        let left = self.0.get();
        if left == 0 {
            return false;
        }
        self.0.set(left - 1);
        true
    }
}

fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    floor: f64,
    depth: usize,
    budget: &Budget,
) -> f64 {
    let (value, err, resabs) = gk15(f, a, b);
    // min depth 3: a kink at a panel midpoint can cancel out of the K-G
    // difference, so never trust the first few estimates.
    // floor: explicit noise level of the integrand (iterated quadrature);
    // resabs term: round-off limit of the error estimate itself
    if (depth >= 3
        && (err <= tol.max(floor) || err <= 16.0 * f64::EPSILON * resabs))
        || depth >= 48
        || !budget.take()
    {
        return value;
    }
    let mid = 0.5 * (a + b);
    adaptive(f, a, mid, 0.5 * tol, floor, depth + 1, budget)
        + adaptive(f, mid, b, 0.5 * tol, floor, depth + 1, budget)
}

/// Integrate f over [a, b] to roughly `tol` absolute accuracy by adaptive
/// bisection. Handles integrable endpoint singularities (t^(alpha-1) style)
/// through depth-limited refinement.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let budget = Budget(std::cell::Cell::new(1 << 20));
    adaptive(&f, a, b, tol.max(1e-15), 0.0, 0, &budget)
}

/// Integrate f over the unit square by iterated adaptive quadrature. The outer
/// pass cannot resolve below the inner pass's noise, so its subdivision is
/// floored accordingly; expect roughly `tol`-level accuracy, not better.
pub fn integrate2d_unit_square<F: Fn(f64, f64) -> f64>(f: F, tol: f64) -> f64 {
    let inner_tol = (0.02 * tol).max(1e-15);
    let budget = Budget(std::cell::Cell::new(1 << 20));
    let budget_ref = &budget;
    let fr = &f;
    let line = move |x: f64| {
        adaptive(&move |y: f64| fr(x, y), 0.0, 1.0, inner_tol, 0.0, 0, budget_ref)
    };
    adaptive(&line, 0.0, 1.0, tol.max(1e-15), 8.0 * inner_tol, 0, budget_ref)
}
