//! Nelder-Mead downhill simplex for the low-dimensional fits.

use alloc::vec::Vec;

use crate::math;

pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
}

fn eval<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64]) -> f64 {
    let v = f(x);
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Minimizes `f` from `start`, with an initial simplex of edge `step` along
/// each axis.
pub fn minimize<F: Fn(&[f64]) -> f64>(f: F, start: &[f64], step: f64, max_iter: usize) -> Minimum {
    let dim = start.len();
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    pts.push(start.to_vec());
    for i in 0..dim {
        let mut p = start.to_vec();
        p[i] += step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| eval(&f, p)).collect();

    for _ in 0..max_iter {
        // Sort vertices best first.
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        let spread = math::abs(vals[dim] - vals[0]);
        let size = pts[1..]
            .iter()
            .flat_map(|p| p.iter().zip(&pts[0]).map(|(a, b)| math::abs(a - b)))
            .fold(0.0, f64::max);
        if spread <= 1e-14 * (1.0 + math::abs(vals[0])) && size <= 1e-9 {
            break;
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|k| pts[..dim].iter().map(|p| p[k]).sum::<f64>() / dim as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&pts[dim])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };

        let reflected = along(-1.0);
        let fr = eval(&f, &reflected);
        if fr < vals[0] {
            let expanded = along(-2.0);
            let fe = eval(&f, &expanded);
            if fe < fr {
                pts[dim] = expanded;
                vals[dim] = fe;
            } else {
                pts[dim] = reflected;
                vals[dim] = fr;
            }
            continue;
        }
        if fr < vals[dim - 1] {
            pts[dim] = reflected;
            vals[dim] = fr;
            continue;
        }
        let (contracted, fc) = if fr < vals[dim] {
            let c = along(-0.5);
            let fc = eval(&f, &c);
            (c, fc)
        } else {
            let c = along(0.5);
            let fc = eval(&f, &c);
            (c, fc)
        };
        if fc < vals[dim].min(fr) {
            pts[dim] = contracted;
            vals[dim] = fc;
            continue;
        }
        // Shrink towards the best vertex.
        let best = pts[0].clone();
        for i in 1..=dim {
            for k in 0..dim {
                pts[i][k] = best[k] + 0.5 * (pts[i][k] - best[k]);
            }
            vals[i] = eval(&f, &pts[i]);
        }
    }

    let (i, &value) = vals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty simplex");
    Minimum { x: pts[i].clone(), value }
}
