//! Elementary differentials and Euler schemes for branched and geometric
//! drivers.

use std::collections::HashMap;

use num::{BigInt, One};

use crate::error::{Error, Result};
use crate::freebasis::{GeneratorBasis, Word};
use crate::hopf::{gl_product, ForestSeries};
use crate::poly::{higher_derivative, PolyVectorField, VectorFields};
use crate::roughpath::{extend_increment_tensor, GridRoughPath};
use crate::scalar::{factorial, Q};
use crate::tensoriso::{enumerate_a_pi, psi, psi_inv, PiScaling, TensorSeries};
use crate::trees::CanonicalTree;

/// `c_τ = 1 / Π m_j!` over the multiplicities `m_j` of equal root children.
///
/// This is the factor that makes `τ ↦ f_τ` a pre-Lie morphism when ↷ carries
/// single-cut multiplicities: e.g. `•_j ↷ [•_j]_i = 2[•_j•_j]_i + [[•_j]_j]_i`
/// forces `f_{[•_j•_j]_i} = ½ D²f_i(f_j, f_j)`.
pub fn c_tau(t: &CanonicalTree) -> Q {
    let denom: BigInt = t.child_classes().iter().map(|(_, m)| factorial(*m)).product();
    Q::new(BigInt::one(), denom)
}

/// Memoized table `τ ↦ f_τ` for one set of driving fields.
pub struct ElementaryDifferentials<'a> {
    fields: &'a VectorFields,
    table: HashMap<CanonicalTree, PolyVectorField>,
}

impl<'a> ElementaryDifferentials<'a> {
    pub fn new(fields: &'a VectorFields) -> Self {
        ElementaryDifferentials {
            fields,
            table: HashMap::new(),
        }
    }

    /// `f_τ = c_τ (Dⁿ f_i)(f_{σ₁},…,f_{σ_n})` for `τ = [σ₁…σ_n]_i`.
    pub fn get(&mut self, t: &CanonicalTree) -> Result<PolyVectorField> {
        if let Some(f) = self.table.get(t) {
            return Ok(f.clone());
        }
        let fi = self
            .fields
            .field(t.label())
            .ok_or_else(|| Error::domain(format!("no vector field for label {}", t.label())))?
            .clone();
        let children: Vec<PolyVectorField> = t.children().iter().map(|c| self.get(c)).collect::<Result<_>>()?;
        let refs: Vec<&PolyVectorField> = children.iter().collect();
        let value = PolyVectorField::new(fi.components().iter().map(|p| higher_derivative(p, &refs)).collect())?
            .scale(&c_tau(t));
        self.table.insert(t.clone(), value.clone());
        Ok(value)
    }

    /// Linear extension to a series: trees contribute, other forests are ignored.
    pub fn of_series(&mut self, s: &ForestSeries<Q>) -> Result<PolyVectorField> {
        let mut out = PolyVectorField::zero(self.fields.state_dim());
        for (f, c) in s.iter() {
            if let Some(t) = f.as_tree() {
                out = out.add(&self.get(t)?.scale(c));
            }
        }
        Ok(out)
    }
}

/// Stand-alone `f_τ`.
pub fn elementary_differential(t: &CanonicalTree, fields: &VectorFields) -> Result<PolyVectorField> {
    ElementaryDifferentials::new(fields).get(t)
}

fn check_state(y0: &[Q], fields: &VectorFields) -> Result<()> {
    if y0.len() != fields.state_dim() {
        return Err(Error::domain(format!("initial state has {} entries, fields act on ℝ^{}", y0.len(), fields.state_dim())));
    }
    Ok(())
}

fn add_into(y: &mut [Q], dy: Vec<Q>) {
    y.iter_mut().zip(dy).for_each(|(a, b)| *a += b);
}

/// `Y_{k+1} = Y_k + Σ_{|τ| ≤ ⌊p⌋} ⟨X_{t_k,t_{k+1}}, τ⟩ f_τ(Y_k)`.
pub fn branched_euler_solve(rp: &GridRoughPath, fields: &VectorFields, y0: &[Q]) -> Result<Vec<Vec<Q>>> {
    check_state(y0, fields)?;
    let mut table = ElementaryDifferentials::new(fields);
    let mut path = vec![y0.to_vec()];
    for x in rp.increments() {
        let mut y = path.last().expect("non-empty").clone();
        let mut dy = vec![Q::from_integer(0.into()); y.len()];
        for (f, c) in x.iter() {
            if let Some(t) = f.as_tree() {
                for (acc, v) in dy.iter_mut().zip(table.get(t)?.eval(&y)) {
                    *acc += c * v;
                }
            }
        }
        add_into(&mut y, dy);
        path.push(y);
    }
    Ok(path)
}

/// The fields `f̄ = (f_{τ₁},…,f_{τ_k})` attached to the generators.
pub fn generator_fields(basis: &GeneratorBasis, k: usize, fields: &VectorFields) -> Result<Vec<PolyVectorField>> {
    let mut table = ElementaryDifferentials::new(fields);
    basis.generators()[..k].iter().map(|g| table.get(g)).collect()
}

/// Ψ-image of every step of a branched path.
pub fn psi_driver(rp: &GridRoughPath, basis: &GeneratorBasis) -> Result<Vec<TensorSeries<Q>>> {
    let scaling = PiScaling::from_basis(rp.p().clone(), basis)?;
    rp.increments().iter().map(|x| psi(x, basis, &scaling)).collect()
}

/// `Y_{k+1} = Y_k + Σ_{R ∈ 𝒜¹_Π, R ≠ ∅} ⟨X̄_k, R⟩ (f̄_{r₁} ◁ (f̄_{r₂} ◁ ⋯ f̄_{r_m}))(Y_k)`,
/// the word operators `f̄_{r₁}⋯f̄_{r_m} I` built symbolically.
pub fn geometric_euler_solve(steps: &[TensorSeries<Q>], fbar: &[PolyVectorField], y0: &[Q]) -> Result<Vec<Vec<Q>>> {
    let Some(first) = steps.first() else {
        return Ok(vec![y0.to_vec()]);
    };
    let scaling = first.scaling().clone();
    if fbar.len() < scaling.k() {
        return Err(Error::domain("need one vector field per generator in 𝒜¹_Π"));
    }
    if fbar.iter().any(|f| f.dim() != y0.len()) {
        return Err(Error::domain("field and state dimensions differ"));
    }
    let words: Vec<Word> = enumerate_a_pi(&Q::one(), &scaling).into_iter().skip(1).collect();
    let mut ops: HashMap<Word, PolyVectorField> = HashMap::new();
    // words sorted by length, so every suffix is known before it is needed
    for w in &words {
        let op = match w.split_first() {
            Some((r, rest)) if !rest.is_empty() => fbar[*r as usize - 1].pre_lie(&ops[rest]),
            Some((r, _)) => fbar[*r as usize - 1].clone(),
            None => unreachable!("empty word skipped"),
        };
        ops.insert(w.clone(), op);
    }
    let mut path = vec![y0.to_vec()];
    for x in steps {
        if x.scaling() != &scaling {
            return Err(Error::domain("driver steps use different scalings"));
        }
        let mut y = path.last().expect("non-empty").clone();
        let mut dy = vec![Q::from_integer(0.into()); y.len()];
        for w in &words {
            let c = x.coeff(w);
            if c == Q::from_integer(0.into()) {
                continue;
            }
            for (acc, v) in dy.iter_mut().zip(ops[w].eval(&y)) {
                *acc += &c * v;
            }
        }
        add_into(&mut y, dy);
        path.push(y);
    }
    Ok(path)
}

/// Solution of the linear equation driven by right multiplication:
/// `Y_{k+1} = Y_k ⋆ ı(exp(log Ψ(X_k)))` with the extension taken in the
/// tensor algebra at cap `n/p`. Returns `Y_k` for every grid index.
pub fn linear_group_rde(rp: &GridRoughPath, n: usize, basis: &GeneratorBasis) -> Result<Vec<ForestSeries<Q>>> {
    if n < rp.level() || basis.degree_bound() < n {
        return Err(Error::domain("need path level ≤ n ≤ basis bound"));
    }
    let scaling = PiScaling::from_basis(rp.p().clone(), basis)?;
    let mut out = vec![ForestSeries::unit(Some(n))];
    for x in rp.increments() {
        let step = psi_inv(&extend_increment_tensor(x, n, basis, &scaling)?, basis)?;
        let next = gl_product(out.last().expect("non-empty"), &step);
        out.push(next);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hopf::pre_lie;
    use crate::poly::Polynomial;
    use crate::scalar::{q, qr};
    use crate::trees::tree;

    fn fields() -> VectorFields {
        let f = |a: &str, b: &str| {
            PolyVectorField::new(vec![Polynomial::parse(a, 2).unwrap(), Polynomial::parse(b, 2).unwrap()]).unwrap()
        };
        VectorFields::new(vec![f("x2^2 + 1", "x1*x2"), f("x1", "1 - x2^3")]).unwrap()
    }

    #[test]
    fn small_trees() {
        let fs = fields();
        let mut t = ElementaryDifferentials::new(&fs);
        assert_eq!(&t.get(&tree("1")).unwrap(), fs.field(1).unwrap());
        // [•_2]_1 = (Df_1)(f_2) = f_2 ◁ f_1
        assert_eq!(t.get(&tree("1[2]")).unwrap(), fs.field(2).unwrap().pre_lie(fs.field(1).unwrap()));
        assert_eq!(c_tau(&tree("1[2,2]")), qr(1, 2));
        assert_eq!(c_tau(&tree("1[2,1]")), q(1));
    }

    #[test]
    fn pre_lie_morphism_small() {
        let fs = fields();
        let mut t = ElementaryDifferentials::new(&fs);
        for (a, b) in [("1", "1[1]"), ("2", "1[2]"), ("1[2]", "2")] {
            let lhs = t.of_series(&pre_lie(&tree(a), &tree(b))).unwrap();
            let rhs = t.get(&tree(a)).unwrap().pre_lie(&t.get(&tree(b)).unwrap());
            assert_eq!(lhs, rhs, "{a} ↷ {b}");
        }
    }
}
