//! The quadratic form written through a top-degree cup functional.
//!
//! With `X(u) = ⟨u, Ωⁿ⁻¹, Ω̄ⁿ⟩`, `Y(u) = ⟨u, Ωⁿ, Ω̄ⁿ⁻¹⟩` and `D = ⟨Ωⁿ, Ω̄ⁿ⟩`,
//!
//! `c·q(α,β) ∝ 2⟨α, β, Ωⁿ⁻¹, Ω̄ⁿ⁻¹⟩ − (2(n−1)/n)·(X(α)Y(β) + X(β)Y(α)) / D`.
//!
//! The correction term is symmetric in `α, β` and its weight `2(n−1)/n` is the
//! one for which the right side is proportional to `q(α,β)` whenever the cup
//! functional is the polarization of `c·qⁿ`.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

type C = Complex<f64>;

/// A symmetric `2n`-linear functional on `V ⊗ ℂ`, standing in for
/// `(α₁, …, α₂ₙ) ↦ ∫ α₁ ∧ ⋯ ∧ α₂ₙ`.
pub trait CupFunctional: Sync {
    /// Half the number of arguments.
    fn half_degree(&self) -> usize;
    fn dim(&self) -> usize;
    fn cup(&self, args: &[&DVector<C>]) -> C;
}

/// The polarization of `c·qⁿ`: `c · (2ⁿ n! / (2n)!) · Σ_matchings Π q(x_a, x_b)`,
/// so that `cup(α, …, α) = c·q(α)ⁿ`.
#[derive(Clone, Debug)]
pub struct SyntheticCup {
    gram: DMatrix<C>,
    c: f64,
    n: usize,
}

impl SyntheticCup {
    pub fn new(gram: &DMatrix<f64>, c: f64, n: usize) -> Self {
        Self { gram: gram.map(|x| C::new(x, 0.0)), c, n }
    }
}

fn matching_sum(gram: &DMatrix<C>, args: &[&DVector<C>], used: &mut [bool]) -> C {
    let Some(first) = used.iter().position(|u| !u) else {
        return C::new(1.0, 0.0);
    };
    used[first] = true;
    let mut total = C::new(0.0, 0.0);
    for k in (first + 1)..args.len() {
        if used[k] {
            continue;
        }
        used[k] = true;
        let pair = (args[first].transpose() * gram * args[k])[(0, 0)];
        total += pair * matching_sum(gram, args, used);
        used[k] = false;
    }
    used[first] = false;
    total
}

impl CupFunctional for SyntheticCup {
    fn half_degree(&self) -> usize {
        self.n
    }

    fn dim(&self) -> usize {
        self.gram.nrows()
    }

    fn cup(&self, args: &[&DVector<C>]) -> C {
        assert_eq!(args.len(), 2 * self.n, "cup takes 2n arguments");
        let n = self.n as i32;
        let fact = |k: i32| (1..=k).map(f64::from).product::<f64>();
        let weight = self.c * 2f64.powi(n) * fact(n) / fact(2 * n);
        matching_sum(&self.gram, args, &mut vec![false; args.len()]) * weight
    }
}

/// The explicit two-term expression for `c·q(α,β)`, up to the positive factor
/// fixed by the choice of `Ω`.
pub fn bbf_explicit(cup: &dyn CupFunctional, omega: &DVector<C>, alpha: &DVector<f64>, beta: &DVector<f64>) -> Result<f64> {
    let n = cup.half_degree();
    for v in [omega.len(), alpha.len(), beta.len()] {
        if v != cup.dim() {
            return Err(Error::DimensionMismatch { expected: cup.dim(), found: v });
        }
    }
    let a = alpha.map(|x| C::new(x, 0.0));
    let b = beta.map(|x| C::new(x, 0.0));
    let bar = omega.map(|z| z.conj());
    let call = |head: &[&DVector<C>], k: usize, l: usize| {
        let mut args: Vec<&DVector<C>> = head.to_vec();
        args.extend(std::iter::repeat_n(omega, k));
        args.extend(std::iter::repeat_n(&bar, l));
        cup.cup(&args)
    };
    let first = call(&[&a, &b], n - 1, n - 1) * 2.0;
    if n == 1 {
        return Ok(first.re);
    }
    let den = call(&[], n, n);
    if den.norm() <= 1e-14 * omega.norm_squared().powi(n as i32) {
        return Err(Error::VanishingDenominator);
    }
    let x = |u: &DVector<C>| call(&[u], n - 1, n);
    let y = |u: &DVector<C>| call(&[u], n, n - 1);
    let weight = 2.0 * (n as f64 - 1.0) / n as f64;
    let second = (x(&a) * y(&b) + x(&b) * y(&a)) * weight / den;
    Ok((first - second).re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::posgrass::plane_to_null;
    use crate::quadspace::QuadraticSpace;
    use crate::sample::{random_positive_plane, seeded, uniform_vector};

    fn lorentz_omega() -> (QuadraticSpace, DVector<C>) {
        let v = QuadraticSpace::diagonal(2, 2);
        let omega = DVector::from_vec(vec![C::new(1.0, 0.0), C::new(0.0, 1.0), C::new(0.0, 0.0), C::new(0.0, 0.0)]);
        (v, omega)
    }

    #[test]
    fn synthetic_cup_on_the_diagonal() {
        let (v, _) = lorentz_omega();
        let mut rng = seeded(3);
        for n in 1..=3 {
            let cup = SyntheticCup::new(v.gram(), 2.5, n);
            let x = uniform_vector(4, 1.0, &mut rng);
            let xc = x.map(|t| C::new(t, 0.0));
            let args: Vec<&DVector<C>> = std::iter::repeat_n(&xc, 2 * n).collect();
            let want = 2.5 * v.norm2(&x).powi(n as i32);
            assert!((cup.cup(&args).re - want).abs() < 1e-12 * want.abs().max(1.0));
        }
    }

    #[test]
    fn n_one_is_twice_the_form() {
        let v = QuadraticSpace::diagonal(3, 19);
        let cup = SyntheticCup::new(v.gram(), 1.0, 1);
        let mut rng = seeded(5);
        let omega = plane_to_null(&random_positive_plane(&v, &mut rng));
        for _ in 0..20 {
            let a = uniform_vector(22, 2.0, &mut rng);
            let b = uniform_vector(22, 2.0, &mut rng);
            let val = bbf_explicit(&cup, omega.vector(), &a, &b).unwrap();
            assert!((val - 2.0 * v.inner(&a, &b)).abs() < 1e-12);
        }
    }

    #[test]
    fn proportional_for_higher_n() {
        let (v, omega) = lorentz_omega();
        let mut rng = seeded(8);
        for n in 2..=3 {
            let cup = SyntheticCup::new(v.gram(), 2.5, n);
            let mut ratios = Vec::new();
            for _ in 0..100 {
                let a = uniform_vector(4, 1.0, &mut rng);
                let b = uniform_vector(4, 1.0, &mut rng);
                let q = v.inner(&a, &b);
                if q.abs() < 1e-2 {
                    continue;
                }
                ratios.push(bbf_explicit(&cup, &omega, &a, &b).unwrap() / q);
            }
            let r0 = ratios[0];
            assert!(ratios.iter().all(|r| (r - r0).abs() < 1e-8 * r0.abs()));
            assert!(r0 > 0.0);
        }
    }

    #[test]
    fn positive_on_the_real_part() {
        let (v, omega) = lorentz_omega();
        let re = omega.map(|z| 2.0 * z.re);
        for n in 1..=3 {
            let cup = SyntheticCup::new(v.gram(), 1.0, n);
            assert!(bbf_explicit(&cup, &omega, &re, &re).unwrap() > 0.0);
        }
    }

    #[test]
    fn vanishing_denominator() {
        let v = QuadraticSpace::diagonal(2, 2);
        let cup = SyntheticCup::new(v.gram(), 1.0, 2);
        // a null vector with q(Ω, Ω̄) = 0 makes the denominator vanish
        let omega = DVector::from_vec(vec![C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(0.0, 0.0)]);
        let a = DVector::from_element(4, 1.0);
        assert_eq!(bbf_explicit(&cup, &omega, &a, &a).unwrap_err(), Error::VanishingDenominator);
    }
}
