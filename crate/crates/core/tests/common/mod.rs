#![allow(dead_code)]

use detflux::geometry::{
    affine, bump_field, constant, identity, linear, quadratic_example, random_polynomial, sphere_valued_map, sum, trig,
    zero, Domain, SmoothMap,
};

/// Leibniz permutation sum; independent of the library's LU and Laplace code.
pub fn leibniz_det(n: usize, a: &[f64]) -> f64 {
    fn permute(k: usize, perm: &mut Vec<usize>, sign: f64, n: usize, a: &[f64], acc: &mut f64) {
        if k == n {
            *acc += sign * (0..n).map(|i| a[i * n + perm[i]]).product::<f64>();
            return;
        }
        for j in k..n {
            perm.swap(k, j);
            permute(k + 1, perm, if j == k { sign } else { -sign }, n, a, acc);
            perm.swap(k, j);
        }
    }
    let mut acc = 0.0;
    permute(0, &mut (0..n).collect(), 1.0, n, a, &mut acc);
    acc
}

/// Unit-ball volume from the Gamma recursion `V_n = 2π/n · V_{n-2}`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / n as f64 * unit_ball_volume(n - 2),
    }
}

/// Deterministic matrix with entries in `[-1, 1]` plus `shift` on the diagonal.
pub fn test_matrix(n: usize, seed: u64, shift: f64) -> Vec<f64> {
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (0..n * n)
        .map(|k| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let u = (s >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0;
            if k % (n + 1) == 0 {
                u + shift
            } else {
                u
            }
        })
        .collect()
}

fn center_of(d: &Domain) -> Vec<f64> {
    d.center().to_vec()
}

/// Every C² library map family instantiated on `d`.
pub fn zoo(d: &Domain) -> Vec<SmoothMap> {
    let n = d.dim();
    let c = center_of(d);
    let offset: Vec<f64> = (0..n).map(|i| 0.1 * (i as f64 + 1.0)).collect();
    let amp: Vec<f64> = (0..n).map(|i| 0.05 + 0.02 * i as f64).collect();
    let mut g_offset = vec![0.0; n];
    g_offset[0] = 2.5;
    let g = affine(n, test_matrix(n, 3, 0.0).iter().map(|v| 0.3 * v).collect(), g_offset).unwrap();
    let mut maps = vec![
        identity(n).unwrap(),
        zero(n).unwrap(),
        constant(offset.clone()).unwrap(),
        linear(n, test_matrix(n, 1, 1.5)).unwrap(),
        affine(n, test_matrix(n, 2, 1.0), offset).unwrap(),
        random_polynomial(n, 2, 11, 0.3).unwrap(),
        random_polynomial(n, 3, 12, 0.2).unwrap(),
        trig(n, 0.2).unwrap(),
        sum(vec![identity(n).unwrap(), bump_field(c, 0.4, amp).unwrap()]).unwrap(),
        sphere_valued_map(&g, d).unwrap(),
    ];
    if n == 2 {
        maps.push(quadratic_example().unwrap());
    }
    maps
}

/// Library domains that carry a boundary atlas.
pub fn atlas_domains() -> Vec<Domain> {
    vec![
        Domain::unit_ball(2).unwrap(),
        Domain::unit_ball(3).unwrap(),
        Domain::unit_ball(4).unwrap(),
        Domain::unit_box(2).unwrap(),
        Domain::unit_box(3).unwrap(),
        Domain::unit_box(4).unwrap(),
        Domain::ellipse(2.0, 0.5).unwrap(),
    ]
}

pub fn has_bump(f: &SmoothMap) -> bool {
    f.name().contains("bump")
}
