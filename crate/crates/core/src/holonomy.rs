//! Holonomicity of `W_{t,x}(t)`-modules via leading monomials of a reduced
//! Gröbner basis: with `n` polynomial and `m` rational variables, the
//! quotient is holonomic iff for every subset `A` of the `2n+m` monomial
//! variables with `|A| = n+1` and every position, some basis element has its
//! leading monomial supported inside `A` at that position.

use crate::groebner::GroebnerBasis;
use crate::{Error, Result};

/// Outcome of the test; a failing subset and position are reported as a
/// witness, in lexicographic subset order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HolonomyVerdict {
    pub holonomic: bool,
    pub witness: Option<(Vec<String>, u32)>,
}

pub fn is_holonomic(gb: &GroebnerBasis) -> Result<HolonomyVerdict> {
    if !gb.reduced {
        return Err(Error::NotReduced);
    }
    let sig = &gb.sig;
    if sig.has_localization() {
        return Err(Error::invalid(
            "holonomicity is defined for signatures without the localization variable",
        ));
    }
    if !sig.is_fully_mixed() {
        return Err(Error::invalid(
            "holonomicity needs every base variable to carry its derivative",
        ));
    }
    let layout = sig.layout();
    let n = layout.n_poly;
    let m = sig.rational_vars().len();
    let universe = 2 * n + m;
    let names = sig.monomial_var_names();

    // the Lemma is stated for non-trivial modules; S = {0} is rejected
    if gb.elements.iter().all(|g| g.is_zero()) {
        let first: Vec<String> = names.iter().take((n + 1).min(universe)).cloned().collect();
        return Ok(HolonomyVerdict {
            holonomic: false,
            witness: Some((first, 1)),
        });
    }
    if n + 1 > universe {
        return Ok(HolonomyVerdict {
            holonomic: true,
            witness: None,
        });
    }

    let ord = gb.compiled()?;
    let mut lm_info: Vec<(u64, u32)> = Vec::with_capacity(gb.elements.len());
    for g in &gb.elements {
        let lm = ord.leading_monomial(g)?;
        lm_info.push((lm.support_mask(layout), lm.pos));
    }

    let mut subset: Vec<usize> = (0..=n).collect();
    loop {
        let mask: u64 = subset.iter().map(|&i| 1u64 << i).sum();
        for pos in 1..=sig.rank() {
            let covered = lm_info
                .iter()
                .any(|&(support, p)| p == pos && support & !mask == 0);
            if !covered {
                let vars = subset.iter().map(|&i| names[i].clone()).collect();
                return Ok(HolonomyVerdict {
                    holonomic: false,
                    witness: Some((vars, pos)),
                });
            }
        }
        // next (n+1)-subset in lexicographic order
        let k = subset.len();
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(HolonomyVerdict {
                    holonomic: true,
                    witness: None,
                });
            }
            i -= 1;
            if subset[i] != universe - k + i {
                break;
            }
        }
        if subset[i] == universe - k + i {
            return Ok(HolonomyVerdict {
                holonomic: true,
                witness: None,
            });
        }
        subset[i] += 1;
        for j in i + 1..k {
            subset[j] = subset[j - 1] + 1;
        }
    }
}
