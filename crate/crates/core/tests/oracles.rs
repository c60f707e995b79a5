//! Cross-checks against quantities computed here from first principles.

use locbc_core::lattice::{enumerate_subspaces, subspace_contains};
use locbc_core::*;

fn pattern(v: &[f64]) -> ErasurePattern {
    ErasurePattern::new(v.to_vec()).unwrap()
}

fn h(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
}

/// Nonzero vectors of GF(2)^3 as bitmasks; the points of the Fano plane.
fn fano_lines() -> Vec<Vec<u8>> {
    let mut lines = Vec::new();
    for a in 1u8..8 {
        for b in (a + 1)..8 {
            let mut l = vec![a, b, a ^ b];
            l.sort();
            if !lines.contains(&l) {
                lines.push(l);
            }
        }
    }
    lines
}

#[test]
fn fano_counts_by_hand() {
    let p = LatticeParams::new(2, 3, 2).unwrap();
    let lines = enumerate_subspaces(p, 2).unwrap();
    let points = enumerate_subspaces(p, 1).unwrap();
    assert_eq!(lines.len(), fano_lines().len());
    assert_eq!(points.len(), 7);
    for line in &lines {
        let n = points.iter().filter(|pt| subspace_contains(line, pt).unwrap()).count();
        assert_eq!(n, 3);
    }
    for pt in &points {
        let n = lines.iter().filter(|l| subspace_contains(l, pt).unwrap()).count();
        assert_eq!(n, 3);
    }
}

#[test]
fn rates_from_explicit_entropies() {
    // I(X;Y1|U) = H(Y1|U) - H(Y1|X), I(U;Y2) = H(Y2) - H(Y2|U)
    let p = LatticeParams::new(2, 3, 2).unwrap();
    let w1 = build_cmloc(p, pattern(&[0.05, 0.24, 0.71])).unwrap().into_matrix();
    let w2 = build_cmloc(p, pattern(&[0.30, 0.15, 0.55])).unwrap().into_matrix();
    let mut data = vec![0.0; 3 * 7];
    for (i, v) in data.iter_mut().enumerate() {
        *v = ((i * 37 + 11) % 17 + 1) as f64;
    }
    let s: f64 = data.iter().sum();
    data.iter_mut().for_each(|v| *v /= s);
    let joint = JointDistribution::from_row_slice(3, 7, &data).unwrap();

    let cond = |w: &Matrix, u: usize| -> (f64, Vec<f64>) {
        let pu: f64 = (0..7).map(|x| data[u * 7 + x]).sum();
        let mut y = vec![0.0; w.ncols()];
        for x in 0..7 {
            for (k, yk) in y.iter_mut().enumerate() {
                *yk += data[u * 7 + x] / pu * w[(x, k)];
            }
        }
        (pu, y)
    };
    let h_given_x = |w: &Matrix| -> f64 {
        (0..7)
            .map(|x| {
                let px: f64 = (0..3).map(|u| data[u * 7 + x]).sum();
                px * h(&w.row(x).iter().copied().collect::<Vec<_>>())
            })
            .sum()
    };

    let h_y1_u: f64 = (0..3).map(|u| { let (pu, y) = cond(&w1, u); pu * h(&y) }).sum();
    let r1 = h_y1_u - h_given_x(&w1);
    let mut y2 = vec![0.0; w2.ncols()];
    let mut h_y2_u = 0.0;
    for u in 0..3 {
        let (pu, y) = cond(&w2, u);
        h_y2_u += pu * h(&y);
        y2.iter_mut().zip(&y).for_each(|(a, b)| *a += pu * b);
    }
    let r2 = h(&y2) - h_y2_u;

    let got = broadcast_rates(&joint, &w1, &w2).unwrap();
    assert!((got.r1 - r1).abs() < 1e-13, "{} vs {r1}", got.r1);
    assert!((got.r2 - r2).abs() < 1e-13, "{} vs {r2}", got.r2);
}

#[test]
fn channel_spec_json_round_trip() {
    let p = LatticeParams::new(3, 3, 2).unwrap();
    let spec = ChannelSpec::from_parts(p, &pattern(&[0.2, 0.3, 0.5]));
    let back = ChannelSpec::from_json(&spec.to_json().unwrap()).unwrap();
    assert_eq!(back, spec);
    assert_eq!(back.build().unwrap().matrix(), spec.build().unwrap().matrix());
}

#[test]
fn point_erasure_channel_capacity() {
    // Only the trivial erasure and the exact point: capacity (1 - rho) ln 7.
    let p = LatticeParams::new(2, 3, 2).unwrap();
    for rho in [0.0, 0.25, 0.9] {
        let ch = build_cmloc(p, pattern(&[rho, 0.0, 1.0 - rho])).unwrap();
        let c = cmloc_capacity(&ch, 1e-13, 100_000).unwrap().nats;
        assert!((c - (1.0 - rho) * 7f64.ln()).abs() < 1e-10);
    }
}
