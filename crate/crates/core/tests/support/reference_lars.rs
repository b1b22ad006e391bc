//! Textbook dense LARS used as an independent oracle.
//!
//! Works on an explicit column-major matrix, inverts the signed active Gram
//! matrix by Gauss-Jordan elimination at every step and never touches a
//! basis or a dummy pool.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefEvent {
    pub index: usize,
    pub gamma: f64,
    pub c_before: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn invert(mut g: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let k = g.len();
    let mut inv: Vec<Vec<f64>> = (0..k).map(|i| (0..k).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for c in 0..k {
        let piv = (c..k).max_by(|&a, &b| g[a][c].abs().total_cmp(&g[b][c].abs())).unwrap();
        g.swap(c, piv);
        inv.swap(c, piv);
        let d = g[c][c];
        for t in 0..k {
            g[c][t] /= d;
            inv[c][t] /= d;
        }
        for r in 0..k {
            if r != c {
                let f = g[r][c];
                if f != 0.0 {
                    for t in 0..k {
                        g[r][t] -= f * g[c][t];
                        inv[r][t] -= f * inv[c][t];
                    }
                }
            }
        }
    }
    inv
}

/// LARS on `p` columns of length `n` until `max_steps` variables entered or
/// no candidate remains. The first entrant has `gamma = 0`; step sizes within
/// a relative `1e-12` go to the smaller index.
pub fn reference_lars(x: &[f64], n: usize, p: usize, y: &[f64], max_steps: usize) -> Vec<RefEvent> {
    let col = |j: usize| &x[j * n..(j + 1) * n];
    let mut r = y.to_vec();
    let mut active: Vec<(usize, f64)> = Vec::new();
    let mut events = Vec::new();
    let ynorm = dot(y, y).sqrt();
    while events.len() < max_steps && active.len() < n - 1 {
        let c: Vec<f64> = (0..p).map(|j| dot(col(j), &r)).collect();
        let big_c = c.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        if big_c <= 1e-12 * ynorm {
            break;
        }
        let inactive: Vec<usize> = (0..p).filter(|j| !active.iter().any(|a| a.0 == *j)).collect();
        if inactive.is_empty() {
            break;
        }
        if active.is_empty() {
            let mut best = inactive[0];
            for &j in &inactive[1..] {
                if c[j].abs() > c[best].abs() * (1.0 + 1e-12) {
                    best = j;
                }
            }
            active.push((best, c[best].signum()));
            events.push(RefEvent {
                index: best,
                gamma: 0.0,
                c_before: big_c,
            });
            continue;
        }
        let k = active.len();
        let signed: Vec<Vec<f64>> = active.iter().map(|&(j, s)| col(j).iter().map(|v| s * v).collect()).collect();
        let gram: Vec<Vec<f64>> = (0..k).map(|a| (0..k).map(|b| dot(&signed[a], &signed[b])).collect()).collect();
        let inv = invert(gram);
        let z: Vec<f64> = inv.iter().map(|row| row.iter().sum()).collect();
        let big_a = 1.0 / z.iter().sum::<f64>().sqrt();
        let mut u = vec![0.0; n];
        for (zi, s) in z.iter().zip(&signed) {
            for (ui, v) in u.iter_mut().zip(s) {
                *ui += big_a * zi * v;
            }
        }
        let mut best: Option<(usize, f64)> = None;
        for &j in &inactive {
            let a = dot(col(j), &u);
            let mut g = f64::INFINITY;
            for cand in [(big_c - c[j]) / (big_a - a), (big_c + c[j]) / (big_a + a)] {
                if cand > 0.0 && cand.is_finite() && cand < g {
                    g = cand;
                }
            }
            if !g.is_finite() {
                continue;
            }
            match best {
                None => best = Some((j, g)),
                Some((_, b)) if g < b * (1.0 - 1e-12) => best = Some((j, g)),
                _ => {}
            }
        }
        let Some((j, gamma)) = best else { break };
        for (ri, ui) in r.iter_mut().zip(&u) {
            *ri -= gamma * ui;
        }
        let cj = dot(col(j), &r);
        active.push((j, cj.signum()));
        events.push(RefEvent {
            index: j,
            gamma,
            c_before: big_c,
        });
    }
    events
}
