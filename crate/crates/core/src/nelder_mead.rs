//! Derivative-free bounded Nelder–Mead simplex minimization.
//!
//! Box constraints are enforced by coordinate clipping of every candidate
//! vertex. The search stops when the simplex diameter (max-coordinate
//! distance of any vertex from the best one) drops below `tolerance`.

/// Reflection, expansion, contraction and shrink coefficients.
const ALPHA: f64 = 1.0;
const GAMMA: f64 = 2.0;
const RHO: f64 = 0.5;
const SIGMA: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

fn clip(x: &mut [f64], bounds: &[(f64, f64)]) {
    for (xi, &(lo, hi)) in x.iter_mut().zip(bounds) {
        *xi = xi.clamp(lo, hi);
    }
}

fn diameter(simplex: &[Vec<f64>], best: &[f64]) -> f64 {
    simplex
        .iter()
        .map(|v| {
            v.iter()
                .zip(best)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max)
        })
        .fold(0.0f64, f64::max)
}

/// Minimizes `f` over the box `bounds`, starting from `x0` with an initial
/// simplex displaced by `steps` along each coordinate.
pub fn minimize(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    steps: &[f64],
    bounds: &[(f64, f64)],
    tolerance: f64,
    max_iterations: usize,
) -> SimplexResult {
    let n = x0.len();
    assert_eq!(steps.len(), n);
    assert_eq!(bounds.len(), n);

    let mut evaluations = 0usize;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        f(x)
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut start = x0.to_vec();
    clip(&mut start, bounds);
    simplex.push(start.clone());
    for i in 0..n {
        let mut v = start.clone();
        v[i] += steps[i];
        clip(&mut v, bounds);
        if (v[i] - start[i]).abs() < 1e-12 {
            // Step ran into the box edge; probe the other direction.
            v[i] = start[i] - steps[i];
            clip(&mut v, bounds);
        }
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v)).collect();

    let mut iterations = 0usize;
    let mut converged = false;
    while iterations < max_iterations {
        // Order the simplex by ascending value.
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let reordered: Vec<Vec<f64>> = order.iter().map(|&i| simplex[i].clone()).collect();
        let revalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
        simplex = reordered;
        values = revalues;

        if diameter(&simplex, &simplex[0]) < tolerance {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..n)
            .map(|d| simplex[..n].iter().map(|v| v[d]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let mut reflected: Vec<f64> = centroid
            .iter()
            .zip(&worst)
            .map(|(c, w)| c + ALPHA * (c - w))
            .collect();
        clip(&mut reflected, bounds);
        let fr = eval(&reflected);

        if fr < values[0] {
            let mut expanded: Vec<f64> = centroid
                .iter()
                .zip(&reflected)
                .map(|(c, r)| c + GAMMA * (r - c))
                .collect();
            clip(&mut expanded, bounds);
            let fe = eval(&expanded);
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
            continue;
        }
        // Contraction, outside or inside depending on the reflected value.
        let toward = if fr < values[n] { &reflected } else { &worst };
        let mut contracted: Vec<f64> = centroid
            .iter()
            .zip(toward)
            .map(|(c, t)| c + RHO * (t - c))
            .collect();
        clip(&mut contracted, bounds);
        let fc = eval(&contracted);
        if fc < fr.min(values[n]) {
            simplex[n] = contracted;
            values[n] = fc;
            continue;
        }
        // Shrink toward the best vertex.
        for i in 1..=n {
            let mut v: Vec<f64> = simplex[0]
                .iter()
                .zip(&simplex[i])
                .map(|(b, x)| b + SIGMA * (x - b))
                .collect();
            clip(&mut v, bounds);
            values[i] = eval(&v);
            simplex[i] = v;
        }
    }

    let mut best = 0;
    for i in 1..=n {
        if values[i] < values[best] {
            best = i;
        }
    }
    SimplexResult {
        x: simplex[best].clone(),
        value: values[best],
        iterations,
        evaluations,
        converged,
    }
}
