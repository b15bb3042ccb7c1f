//! The Ablowitz-Ladik Poisson bracket
//!   {f,g} = i sum_{k=0}^{N-2} rho_k^2 (df/dabar_k dg/da_k - df/da_k dg/dabar_k)
//! evaluated on Wirtinger jets, together with its structural axioms
//! (antisymmetry, Leibniz, Jacobi) and invariance under conjugation.
//! The sum stops at N-2: the terminal coefficient is a Casimir.

use num_complex::Complex64;

use crate::opuc_core::VerblunskyData;
use crate::poly::Coeff;
use crate::wirtinger::{
    jet_families_o2, project_o1, rho_sq_jet, FamilySet, Jet, Jet1, Jet2,
};
use crate::{Error, Result};

/// Cached bracket data at a phase-space point.
#[derive(Debug, Clone)]
pub struct BracketContext {
    n_alpha: usize,
    /// rho_k^2 for k = 0..N-2 (the summation range).
    rho_sq: Vec<Complex64>,
}

impl BracketContext {
    pub fn new(v: &VerblunskyData) -> Self {
        let upper = v.len().saturating_sub(1);
        BracketContext {
            n_alpha: v.len(),
            rho_sq: (0..upper)
                .map(|k| Complex64::new(v.rho_sq(k), 0.0))
                .collect(),
        }
    }

    pub fn n_alpha(&self) -> usize {
        self.n_alpha
    }

    pub fn rho_sq(&self) -> &[Complex64] {
        &self.rho_sq
    }

    /// rho_k^2 as first-order jets, for the outer bracket of nested jets.
    pub fn rho_sq_jets(&self, v: &VerblunskyData) -> Vec<Jet1> {
        (0..self.rho_sq.len()).map(|k| rho_sq_jet(v, k)).collect()
    }
}

/// The bracket over any jet scalar; `rho_sq` fixes the summation range.
pub fn bracket_generic<T: Coeff>(f: &Jet<T>, g: &Jet<T>, rho_sq: &[T]) -> T {
    let mut acc = f.value.zero_like();
    for (k, r) in rho_sq.iter().enumerate() {
        let t1 = f.d_alpha_bar[k].mul(&g.d_alpha[k]);
        let t2 = f.d_alpha[k].mul(&g.d_alpha_bar[k]);
        acc = acc.add(&r.mul(&t1.sub(&t2)));
    }
    acc.scale_c(Complex64::new(0.0, 1.0))
}

/// First-order bracket with dimension checking.
pub fn bracket(f: &Jet1, g: &Jet1, ctx: &BracketContext) -> Result<Complex64> {
    if f.dim() != ctx.n_alpha {
        return Err(Error::DimensionMismatch {
            left: f.dim(),
            right: ctx.n_alpha,
        });
    }
    if g.dim() != ctx.n_alpha {
        return Err(Error::DimensionMismatch {
            left: g.dim(),
            right: ctx.n_alpha,
        });
    }
    Ok(bracket_generic(f, g, &ctx.rho_sq))
}

/// Evaluate two jet polynomials at z, w and bracket the results.
pub fn bracket_of_evals(
    p: &crate::wirtinger::JetPoly,
    q: &crate::wirtinger::JetPoly,
    z: Complex64,
    w: Complex64,
    ctx: &BracketContext,
) -> Result<Complex64> {
    bracket(&p.eval(z), &q.eval(w), ctx)
}

/// A family member evaluated at a point; the random observable of the
/// axiom checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyMember {
    Phi,
    PhiStar,
    Psi,
    PsiStar,
    WallA,
    WallB,
    WallAStar,
    WallBStar,
}

impl FamilyMember {
    /// The member whose evaluation gives the conjugate via the reversal
    /// identity conj(P_n(z)) = conj(z)^n P_n*(1/conj(z)).
    pub fn star_partner(self) -> FamilyMember {
        use FamilyMember::*;
        match self {
            Phi => PhiStar,
            PhiStar => Phi,
            Psi => PsiStar,
            PsiStar => Psi,
            WallA => WallAStar,
            WallAStar => WallA,
            WallB => WallBStar,
            WallBStar => WallB,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Observable {
    pub member: FamilyMember,
    pub n: usize,
    pub z: Complex64,
}

pub fn eval_observable<T: Coeff>(fams: &FamilySet<T>, obs: &Observable) -> T {
    use FamilyMember::*;
    let p = match obs.member {
        Phi => &fams.phi[obs.n].0,
        PhiStar => &fams.phi[obs.n].1,
        Psi => &fams.psi[obs.n].0,
        PsiStar => &fams.psi[obs.n].1,
        WallA => &fams.wall[obs.n].a,
        WallB => &fams.wall[obs.n].b,
        WallAStar => &fams.wall[obs.n].a_star,
        WallBStar => &fams.wall[obs.n].b_star,
    };
    p.eval(obs.z)
}

/// Scaled residual of {f,g} + {g,f}.
pub fn antisymmetry_residual(f: &Jet1, g: &Jet1, ctx: &BracketContext) -> Result<f64> {
    let fg = bracket(f, g, ctx)?;
    let gf = bracket(g, f, ctx)?;
    let scale = fg.norm().max(gf.norm()).max(1.0);
    Ok((fg + gf).norm() / scale)
}

/// Scaled residual of {fg,h} - f{g,h} - {f,h}g.
pub fn leibniz_residual(f: &Jet1, g: &Jet1, h: &Jet1, ctx: &BracketContext) -> Result<f64> {
    let prod = f.mul(g);
    let lhs = bracket(&prod, h, ctx)?;
    let gh = bracket(g, h, ctx)?;
    let fh = bracket(f, h, ctx)?;
    let rhs = f.value * gh + fh * g.value;
    let scale = lhs.norm().max(rhs.norm()).max(1.0);
    Ok((lhs - rhs).norm() / scale)
}

/// Scaled residual of the cyclic Jacobi sum on three observables. Needs
/// exact second derivatives, so the observables are re-evaluated in
/// jet-over-jet arithmetic.
pub fn jacobi_residual(
    v: &VerblunskyData,
    obs: [&Observable; 3],
    n_max: usize,
) -> Result<f64> {
    let fams2 = jet_families_o2(v, n_max)?;
    let ctx = BracketContext::new(v);
    let rho_jets = ctx.rho_sq_jets(v);
    let f2: Jet2 = eval_observable(&fams2, obs[0]);
    let g2: Jet2 = eval_observable(&fams2, obs[1]);
    let h2: Jet2 = eval_observable(&fams2, obs[2]);

    let mut sum = Complex64::new(0.0, 0.0);
    let mut scale: f64 = 1.0;
    for (a, b, c) in [(&f2, &g2, &h2), (&g2, &h2, &f2), (&h2, &f2, &g2)] {
        // {a,b} as a first-order jet, then {{a,b},c} as a number
        let ab: Jet1 = bracket_generic(a, b, &rho_jets);
        let term = bracket(&ab, &project_o1(c), &ctx)?;
        scale = scale.max(term.norm());
        sum += term;
    }
    Ok(sum.norm() / scale)
}

/// Residual of {conj f, conj g} = conj({f,g}), with the conjugates
/// re-expressed through reversed polynomials:
/// conj(P_n(z)) = conj(z)^n P_n*(1/conj(z)). Requires z, w != 0.
pub fn conjugation_residual(
    fams: &FamilySet<Jet1>,
    f: &Observable,
    g: &Observable,
    ctx: &BracketContext,
) -> Result<f64> {
    let fj = eval_observable(fams, f);
    let gj = eval_observable(fams, g);
    let direct = bracket(&fj, &gj, ctx)?.conj();

    let fc = eval_observable(
        fams,
        &Observable {
            member: f.member.star_partner(),
            n: f.n,
            z: f.z.conj().inv(),
        },
    );
    let gc = eval_observable(
        fams,
        &Observable {
            member: g.member.star_partner(),
            n: g.n,
            z: g.z.conj().inv(),
        },
    );
    let pref = f.z.conj().powu(f.n as u32) * g.z.conj().powu(g.n as u32);
    let via_reversal = pref * bracket(&fc, &gc, ctx)?;
    let scale = direct.norm().max(via_reversal.norm()).max(1.0);
    Ok((via_reversal - direct).norm() / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{random_pair, random_v};
    use crate::wirtinger::{jet_families, norm_inv_jet, seed_point};
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn canonical_pair() {
        // {abar_k, a_k} = i rho_k^2 for k <= N-2
        let v = VerblunskyData::in_disc(vec![c(0.5, 0.0), c(0.1, 0.2)]).unwrap();
        let ctx = BracketContext::new(&v);
        let (a, ab) = seed_point(&v);
        let got = bracket(&ab[0], &a[0], &ctx).unwrap();
        assert!((got - c(0.0, v.rho_sq(0))).norm() < 1e-15);
        // holomorphic pair -> 0
        assert!(bracket(&a[0], &a[1], &ctx).unwrap().norm() == 0.0);
        // terminal coefficient is a Casimir (excluded from the sum)
        assert!(bracket(&ab[1], &a[1], &ctx).unwrap().norm() == 0.0);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let v = VerblunskyData::in_disc(vec![c(0.5, 0.0), c(0.1, 0.2)]).unwrap();
        let w = VerblunskyData::in_disc(vec![c(0.5, 0.0)]).unwrap();
        let ctx = BracketContext::new(&v);
        let (a, _) = seed_point(&w);
        assert!(bracket(&a[0], &a[0], &ctx).is_err());
    }

    #[test]
    fn constants_are_casimirs() {
        let v = VerblunskyData::in_disc(vec![c(0.3, 0.1)]).unwrap();
        let ctx = BracketContext::new(&v);
        let fams = jet_families(&v, 0).unwrap();
        let got = bracket_of_evals(&fams.phi[0].0, &fams.phi[0].0, c(1.0, 2.0), c(0.5, 0.0), &ctx)
            .unwrap();
        assert_eq!(got, c(0.0, 0.0));
    }

    #[test]
    fn hand_expanded_bracket_n1() {
        // {Phi_1(z), Phi_1*(w)} with alpha_0 = 0.5, z = 2, w = 1:
        // Phi_1 = z - abar_0, Phi_1* = 1 - a_0 w
        // bracket = i rho_0^2 (-1)(-w) = 0.75 i
        let v = VerblunskyData::in_disc(vec![c(0.5, 0.0), c(0.0, 0.0)]).unwrap();
        let ctx = BracketContext::new(&v);
        let fams = jet_families(&v, 1).unwrap();
        let got =
            bracket_of_evals(&fams.phi[1].0, &fams.phi[1].1, c(2.0, 0.0), c(1.0, 0.0), &ctx)
                .unwrap();
        assert!((got - c(0.0, 0.75)).norm() < 1e-14);
    }

    #[test]
    fn antisymmetry_and_leibniz_random() {
        let mut rng = StdRng::seed_from_u64(31);
        for _ in 0..50 {
            let v = random_v(&mut rng, 4, 0.9);
            let ctx = BracketContext::new(&v);
            let fams = jet_families(&v, 3).unwrap();
            let (z, w) = random_pair(&mut rng);
            let f = fams.phi[3].0.eval(z);
            let g = fams.psi[3].1.eval(w);
            let h = fams.phi[2].1.eval(z * 0.7);
            assert!(antisymmetry_residual(&f, &g, &ctx).unwrap() < 1e-13);
            assert!(leibniz_residual(&f, &g, &h, &ctx).unwrap() < 1e-12);
        }
    }

    #[test]
    fn leibniz_on_seeds() {
        let v = VerblunskyData::in_disc(vec![c(0.4, -0.2), c(0.0, 0.0)]).unwrap();
        let ctx = BracketContext::new(&v);
        let (a, ab) = seed_point(&v);
        assert!(leibniz_residual(&a[0], &ab[0], &a[0], &ctx).unwrap() < 1e-13);
    }

    #[test]
    fn jacobi_random_triples() {
        let mut rng = StdRng::seed_from_u64(32);
        for _ in 0..10 {
            let v = random_v(&mut rng, 3, 0.8);
            let (z, w) = random_pair(&mut rng);
            let u = random_pair(&mut rng).0;
            let obs = [
                Observable { member: FamilyMember::Phi, n: 2, z },
                Observable { member: FamilyMember::Psi, n: 2, z: w },
                Observable { member: FamilyMember::PhiStar, n: 2, z: u },
            ];
            let r = jacobi_residual(&v, [&obs[0], &obs[1], &obs[2]], 2).unwrap();
            assert!(r < 1e-10, "jacobi residual {r}");
        }
    }

    #[test]
    fn conjugation_invariance() {
        let mut rng = StdRng::seed_from_u64(33);
        for _ in 0..20 {
            let v = random_v(&mut rng, 4, 0.9);
            let ctx = BracketContext::new(&v);
            let fams = jet_families(&v, 3).unwrap();
            let (z, w) = random_pair(&mut rng);
            let f = Observable { member: FamilyMember::Phi, n: 3, z };
            let g = Observable { member: FamilyMember::Psi, n: 3, z: w };
            assert!(conjugation_residual(&fams, &f, &g, &ctx).unwrap() < 1e-10);
            let f = Observable { member: FamilyMember::WallA, n: 2, z };
            let g = Observable { member: FamilyMember::WallBStar, n: 2, z: w };
            assert!(conjugation_residual(&fams, &f, &g, &ctx).unwrap() < 1e-10);
        }
    }

    #[test]
    fn bracket_r_with_alpha() {
        // {R_n, alpha_j} = (i/2) R_n alpha_j for j < n
        let mut rng = StdRng::seed_from_u64(34);
        let v = random_v(&mut rng, 4, 0.9);
        let ctx = BracketContext::new(&v);
        let (a, _) = seed_point(&v);
        let n = 3;
        let r = norm_inv_jet(&v, n).unwrap();
        for j in 0..n {
            let got = bracket(&r, &a[j], &ctx).unwrap();
            let want = c(0.0, 0.5) * r.value * v.alpha(j);
            assert!((got - want).norm() < 1e-13 * want.norm().max(1.0));
        }
        // j >= n: R_n does not depend on alpha_j
        let got = bracket(&r, &a[3], &ctx).unwrap();
        assert_eq!(got, c(0.0, 0.0));
    }
}
