//! Bounded simulated binary crossover and polynomial mutation.

use rand::Rng;

/// Crosses two parents gene by gene; each gene pair is recombined with
/// probability 1/2.
pub fn sbx<R: Rng>(rng: &mut R, a: &[f64], b: &[f64], bounds: &[[f64; 2]], eta: f64) -> (Vec<f64>, Vec<f64>) {
    let mut c1 = a.to_vec();
    let mut c2 = b.to_vec();
    for (i, &[lo, hi]) in bounds.iter().enumerate() {
        if rng.gen::<f64>() > 0.5 {
            continue;
        }
        let (x1, x2) = (a[i], b[i]);
        if (x1 - x2).abs() <= 1e-14 {
            continue;
        }
        let (y1, y2) = if x1 < x2 { (x1, x2) } else { (x2, x1) };
        let u: f64 = rng.gen();
        let spread = |gap: f64| {
            let beta = 1.0 + 2.0 * gap / (y2 - y1);
            let alpha = 2.0 - beta.powf(-(eta + 1.0));
            if u <= 1.0 / alpha {
                (u * alpha).powf(1.0 / (eta + 1.0))
            } else {
                (1.0 / (2.0 - u * alpha)).powf(1.0 / (eta + 1.0))
            }
        };
        let lo_child = 0.5 * ((y1 + y2) - spread(y1 - lo) * (y2 - y1));
        let hi_child = 0.5 * ((y1 + y2) + spread(hi - y2) * (y2 - y1));
        let (lo_child, hi_child) = (lo_child.clamp(lo, hi), hi_child.clamp(lo, hi));
        if rng.gen::<bool>() {
            c1[i] = hi_child;
            c2[i] = lo_child;
        } else {
            c1[i] = lo_child;
            c2[i] = hi_child;
        }
    }
    (c1, c2)
}

/// Mutates each gene independently with probability `prob`.
pub fn polynomial_mutation<R: Rng>(rng: &mut R, x: &mut [f64], bounds: &[[f64; 2]], prob: f64, eta: f64) {
    for (g, &[lo, hi]) in x.iter_mut().zip(bounds) {
        if rng.gen::<f64>() >= prob || hi <= lo {
            continue;
        }
        let width = hi - lo;
        let (d1, d2) = ((*g - lo) / width, (hi - *g) / width);
        let u: f64 = rng.gen();
        let pow = 1.0 / (eta + 1.0);
        let dq = if u < 0.5 {
            let v = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1).powf(eta + 1.0);
            v.powf(pow) - 1.0
        } else {
            let v = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2).powf(eta + 1.0);
            1.0 - v.powf(pow)
        };
        *g = (*g + dq * width).clamp(lo, hi);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn children_stay_in_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let bounds = [[0.0, 1.0], [-5.0, 5.0]];
        for _ in 0..2000 {
            let a = [rng.gen::<f64>(), rng.gen_range(-5.0..5.0)];
            let b = [rng.gen::<f64>(), rng.gen_range(-5.0..5.0)];
            let (mut c1, c2) = sbx(&mut rng, &a, &b, &bounds, 15.0);
            polynomial_mutation(&mut rng, &mut c1, &bounds, 1.0, 20.0);
            for c in [&c1, &c2] {
                assert!(c.iter().zip(&bounds).all(|(v, [lo, hi])| v >= lo && v <= hi));
            }
        }
    }

    #[test]
    fn sbx_preserves_the_parent_mean_with_symmetric_room() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let bounds = [[-98.5, 101.5]];
        for _ in 0..500 {
            let (c1, c2) = sbx(&mut rng, &[1.0], &[2.0], &bounds, 15.0);
            assert!((c1[0] + c2[0] - 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn identical_parents_are_copied() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (c1, c2) = sbx(&mut rng, &[0.3], &[0.3], &[[0.0, 1.0]], 15.0);
        assert_eq!((c1[0], c2[0]), (0.3, 0.3));
    }

    #[test]
    fn zero_probability_mutation_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut x = [0.25, 0.75];
        polynomial_mutation(&mut rng, &mut x, &[[0.0, 1.0]; 2], 0.0, 20.0);
        assert_eq!(x, [0.25, 0.75]);
    }
}
