//! Reference implementations used as test oracles. They share no code with
//! the library beyond plain data types.

#![allow(dead_code)]

/// Simple cycles as edge subsets: a subset counts when it has at least three
/// edges, every touched vertex has degree exactly 2, and it is connected.
pub fn cycle_oracle(n: usize, edges: &[(usize, usize)]) -> u64 {
    assert!(edges.len() <= 20);
    let mut count = 0;
    for bits in 1u32..(1 << edges.len()) {
        if bits.count_ones() < 3 {
            continue;
        }
        let chosen: Vec<(usize, usize)> = (0..edges.len())
            .filter(|i| bits >> i & 1 == 1)
            .map(|i| edges[i])
            .collect();
        let mut deg = vec![0; n];
        for &(u, v) in &chosen {
            deg[u] += 1;
            deg[v] += 1;
        }
        if deg.iter().any(|&d| d != 0 && d != 2) {
            continue;
        }
        // connectivity by repeated relaxation
        let mut seen = vec![false; n];
        seen[chosen[0].0] = true;
        let mut changed = true;
        while changed {
            changed = false;
            for &(u, v) in &chosen {
                if seen[u] != seen[v] {
                    seen[u] = true;
                    seen[v] = true;
                    changed = true;
                }
            }
        }
        if chosen.iter().all(|&(u, _)| seen[u]) {
            count += 1;
        }
    }
    count
}

pub const HOUSE: [(usize, usize); 6] = [(0, 1), (1, 2), (2, 3), (3, 0), (3, 4), (4, 0)];
pub const PENTAGON: [(usize, usize); 5] = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)];

fn slot(cycles: u64) -> usize {
    match cycles {
        0 => 0,
        1 => 1,
        3 => 2,
        c => panic!("unexpected cycle count {c}"),
    }
}

/// Cycle-class distribution of a motif after iid edge dropping, with the
/// edges in `keep` never dropped.
pub fn motif_marginal(edges: &[(usize, usize)], keep_all: bool, p: f64) -> [f64; 3] {
    let mut m = [0.0; 3];
    let free = if keep_all { 0 } else { edges.len() };
    for bits in 0u32..(1 << free) {
        let kept: Vec<(usize, usize)> = (0..edges.len())
            .filter(|&i| i >= free || bits >> i & 1 == 0)
            .map(|i| edges[i])
            .collect();
        let dropped = bits.count_ones() as i32;
        let w = p.powi(dropped) * (1.0 - p).powi(free as i32 - dropped);
        m[slot(cycle_oracle(5, &kept))] += w;
    }
    m
}

/// Folded pair table in class order (0, 1, 3).
pub fn omega_oracle(p: f64, q: f64, preserving: bool) -> [[f64; 3]; 3] {
    let sources = [
        (0.5, motif_marginal(&HOUSE, preserving, p)),
        (q / 2.0, motif_marginal(&PENTAGON, false, p)),
        ((1.0 - q) / 2.0, [1.0, 0.0, 0.0]),
    ];
    let mut o = [[0.0; 3]; 3];
    for (w, m) in sources {
        for k in 0..3 {
            for l in 0..3 {
                o[k][l] += w * m[k] * m[l];
            }
        }
    }
    let mut f = o;
    for k in 0..3 {
        for l in 0..3 {
            f[k][l] = (o[k][l] + o[l][k]) / 2.0;
        }
    }
    f
}

/// The six class-level scores `[S00, S11, S33, S01, S03, S13]` written out
/// term by term.
pub fn scores_oracle(w: &[[f64; 3]; 3]) -> [f64; 6] {
    let (w00, w01, w03) = (w[0][0], w[0][1], w[0][2]);
    let (w11, w13, w33) = (w[1][1], w[1][2], w[2][2]);
    [
        2.0 * (w00 - w01 - w03),
        2.0 * (w11 - w01 - w13),
        2.0 * (w33 - w03 - w13),
        2.0 * w01 - w00 - w03 - w11 - w13,
        2.0 * w03 - w00 - w01 - w13 - w33,
        2.0 * w13 - w01 - w11 - w03 - w33,
    ]
}

/// Class-level partition scores P1..P4 from `[S00, S11, S33, S01, S03, S13]`.
pub fn class_pi_oracle(s: &[f64; 6]) -> [f64; 4] {
    let [s00, s11, s33, s01, s03, s13] = *s;
    [
        2.0 * (s00 + s01 + s03 + s11 + s13 + s33),
        2.0 * (s00 + s01 + s11 + s33),
        2.0 * (s00 + s11 + s13 + s33),
        2.0 * (s11 + s00 + s03 + s33),
    ]
}

fn cos(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// NT-Xent computed directly from the softmax definition.
pub fn nt_xent_oracle(z1: &[Vec<f64>], z2: &[Vec<f64>], tau: f64) -> f64 {
    let n = z1.len();
    let mut total = 0.0;
    for i in 0..n {
        let row: f64 = (0..n).map(|j| (cos(&z1[i], &z2[j]) / tau).exp()).sum();
        let col: f64 = (0..n).map(|j| (cos(&z1[j], &z2[i]) / tau).exp()).sum();
        let pos = (cos(&z1[i], &z2[i]) / tau).exp();
        total += -0.5 * (pos / row).ln() - 0.5 * (pos / col).ln();
    }
    total / n as f64
}

pub fn simsiam_oracle(p1: &[f64], p2: &[f64], z1: &[f64], z2: &[f64]) -> f64 {
    -(cos(p1, z2) + cos(p2, z1)) / 2.0
}

/// Symmetric score between item classes `a`, `b` from ordered view counts:
/// for each pair, +1 if (first, second) equals (a, b), -1 if only the first
/// matches, then the same with the roles swapped.
pub fn symmetric_pair_score(views: &[(u64, u64)], a: u64, b: u64) -> i64 {
    let one = |x: u64, y: u64| -> i64 {
        views
            .iter()
            .map(|&(f, s)| match (f == x, s == y) {
                (true, true) => 1,
                (true, false) => -1,
                _ => 0,
            })
            .sum()
    };
    one(a, b) + one(b, a)
}

/// Partition score over ordered item pairs, diagonal included.
pub fn item_pi_oracle(item_classes: &[u64], assignment: &[usize], views: &[(u64, u64)]) -> i64 {
    let n = item_classes.len();
    let mut total = 0;
    for i in 0..n {
        for j in 0..n {
            if assignment[i] == assignment[j] {
                total += symmetric_pair_score(views, item_classes[i], item_classes[j]);
            }
        }
    }
    total
}
