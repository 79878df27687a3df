//! The binomial cascade has a closed-form mass exponent; box sums of the
//! generated measure must reproduce it level by level.

use mfscale_core::synth::{binomial_cascade, CascadeSpec};

fn box_sums(mass: &[f64], level: u32) -> Vec<f64> {
    mass.chunks(mass.len() >> level)
        .map(|c| c.iter().sum())
        .collect()
}

#[test]
fn mass_is_conserved_at_every_level() {
    let c = binomial_cascade(CascadeSpec { p: 0.3, levels: 12 }).unwrap();
    for level in 0..=12 {
        let total: f64 = box_sums(c.values(), level).iter().sum();
        assert!((total - 1.0).abs() < 1e-12, "level {level}: {total}");
    }
}

#[test]
fn partition_function_matches_closed_form() {
    let (p, q) = (0.3f64, 0.7f64);
    let c = binomial_cascade(CascadeSpec { p, levels: 16 }).unwrap();
    for z in [-3.0, -1.0, 0.0, 0.5, 2.0, 5.0] {
        for level in [1u32, 4, 8, 12, 16] {
            let got: f64 = box_sums(c.values(), level).iter().map(|m| m.powf(z)).sum();
            let want = (p.powf(z) + q.powf(z)).powi(level as i32);
            assert!(
                ((got - want) / want).abs() < 1e-9,
                "z {z} level {level}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn box_masses_are_products_of_weights() {
    let c = binomial_cascade(CascadeSpec { p: 0.3, levels: 10 }).unwrap();
    for (i, m) in box_sums(c.values(), 10).iter().enumerate() {
        // each 1-bit in the index took the right branch
        let right = i.count_ones() as i32;
        let want = 0.7f64.powi(right) * 0.3f64.powi(10 - right);
        assert!(((m - want) / want).abs() < 1e-12, "cell {i}");
    }
}
