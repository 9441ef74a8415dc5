//! Shape diagnostics for wave profiles.

use crate::grid::GridProfile;

/// Index of the largest `|w_i|`; ties go to the smallest index.
pub fn argmax_abs(w: &GridProfile) -> usize {
    let mut best = 0;
    for (i, v) in w.values().iter().enumerate() {
        if v.abs() > w.values()[best].abs() {
            best = i;
        }
    }
    best
}

/// Shift that moves the extremum of `aw` to index `N/2`, for use with
/// [`GridProfile::shifted`].
pub fn centering_shift(aw: &GridProfile) -> isize {
    (aw.len() / 2) as isize - argmax_abs(aw) as isize
}

/// `max w − min w ≤ rel·‖w‖_∞`.
pub fn is_constant(w: &GridProfile, rel: f64) -> bool {
    let (lo, hi) = w.values().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    hi - lo <= rel * w.max_abs()
}

/// `‖W·1_{|φ|>K/2}‖₂ / ‖W‖₂`.
pub fn tail_mass(w: &GridProfile) -> f64 {
    let spec = w.spec();
    let half = 0.5 * spec.half_period;
    let (mut tail, mut total) = (0.0, 0.0);
    for (i, v) in w.values().iter().enumerate() {
        let e = v * v;
        total += e;
        if spec.phi(i).abs() > half {
            tail += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        (tail / total).sqrt()
    }
}

/// Number of strict local extrema on the periodic grid, ignoring wiggles whose
/// height is below `prominence·‖w‖_∞`.
pub fn count_local_extrema(w: &GridProfile, prominence: f64) -> usize {
    let v = w.values();
    let n = v.len();
    if n == 0 {
        return 0;
    }
    let thresh = prominence * w.max_abs();
    // two laps around the circle; turning points are counted on the second
    let mut count = 0;
    let mut rising = false;
    let mut pivot = v[0];
    for k in 1..=2 * n {
        let x = v[k % n];
        let counting = k > n;
        if rising {
            if x > pivot {
                pivot = x;
            } else if pivot - x > thresh {
                count += usize::from(counting);
                rising = false;
                pivot = x;
            }
        } else if x < pivot {
            pivot = x;
        } else if x - pivot > thresh {
            count += usize::from(counting);
            rising = true;
            pivot = x;
        }
    }
    count
}

/// `min ‖a − T b‖₂ / ‖a‖₂` over periodic shifts, reflection and sign flip.
pub fn aligned_distance(a: &GridProfile, b: &GridProfile) -> f64 {
    let n = a.len();
    assert_eq!(n, b.len(), "profiles must share a grid");
    let av = a.values();
    let norm: f64 = av.iter().map(|x| x * x).sum();
    let mut best = f64::INFINITY;
    for reflected in [false, true] {
        let bv: Vec<f64> = if reflected { b.reversed().into_values() } else { b.values().to_vec() };
        for s in 0..n {
            let (mut plus, mut minus) = (0.0, 0.0);
            for i in 0..n {
                let y = bv[(i + n - s) % n];
                plus += (av[i] - y).powi(2);
                minus += (av[i] + y).powi(2);
            }
            best = best.min(plus).min(minus);
        }
    }
    if norm == 0.0 {
        best.sqrt()
    } else {
        (best / norm).sqrt()
    }
}
