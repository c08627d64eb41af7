use std::collections::BTreeSet;
use std::sync::Arc;

use super::{Name, Term};

/// Capture-avoiding substitution `body[arg/name]`.
///
/// Binders that would capture a free variable of `arg` are renamed to a
/// fresh name built by appending primes.
pub fn substitute(body: &Term, name: &Name, arg: &Term) -> Term {
    let fv = arg.free_variables();
    subst(body, name, arg, &fv).unwrap_or_else(|| body.clone())
}

/// Substitution of a closed argument. No binder can capture anything, so no
/// free-variable bookkeeping is needed. Used by the machine, whose stacks
/// hold closed terms only.
pub(crate) fn substitute_closed(body: &Term, name: &Name, arg: &Term) -> Term {
    subst_closed(body, name, arg).unwrap_or_else(|| body.clone())
}

/// Returns a variant of `base` (the name itself or with appended primes) that
/// is not in `avoid`.
pub fn fresh_name(base: &Name, avoid: &BTreeSet<Name>) -> Name {
    let mut candidate = base.as_str().to_string();
    loop {
        candidate.push('\'');
        let n = Name::new(&candidate);
        if !avoid.contains(&n) {
            return n;
        }
    }
}

// `None` means the term is unchanged, so untouched subtrees stay shared.
fn subst_closed(t: &Term, x: &Name, arg: &Term) -> Option<Term> {
    match t {
        Term::Var(y) if y == x => Some(arg.clone()),
        Term::Lam(y, body) if y != x => {
            subst_closed(body, x, arg).map(|b| Term::Lam(y.clone(), Arc::new(b)))
        }
        Term::App(f, a) => {
            let nf = subst_closed(f, x, arg);
            let na = subst_closed(a, x, arg);
            if nf.is_none() && na.is_none() {
                return None;
            }
            Some(Term::App(
                nf.map(Arc::new).unwrap_or_else(|| f.clone()),
                na.map(Arc::new).unwrap_or_else(|| a.clone()),
            ))
        }
        _ => None,
    }
}

fn subst(t: &Term, x: &Name, arg: &Term, fv_arg: &BTreeSet<Name>) -> Option<Term> {
    match t {
        Term::Var(y) if y == x => Some(arg.clone()),
        Term::Lam(y, body) if y != x => {
            if fv_arg.contains(y) && body.occurs_free(x) {
                let mut avoid = fv_arg.clone();
                avoid.extend(body.free_variables());
                avoid.insert(x.clone());
                let y2 = fresh_name(y, &avoid);
                let fresh_var = Term::Var(y2.clone());
                let renamed = subst(body, y, &fresh_var, &BTreeSet::from([y2.clone()]))
                    .unwrap_or_else(|| (**body).clone());
                let b = subst(&renamed, x, arg, fv_arg).unwrap_or(renamed);
                Some(Term::Lam(y2, Arc::new(b)))
            } else {
                subst(body, x, arg, fv_arg).map(|b| Term::Lam(y.clone(), Arc::new(b)))
            }
        }
        Term::App(f, a) => {
            let nf = subst(f, x, arg, fv_arg);
            let na = subst(a, x, arg, fv_arg);
            if nf.is_none() && na.is_none() {
                return None;
            }
            Some(Term::App(
                nf.map(Arc::new).unwrap_or_else(|| f.clone()),
                na.map(Arc::new).unwrap_or_else(|| a.clone()),
            ))
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;
    use proptest::prelude::*;

    fn x() -> Name {
        Name::new("x")
    }

    #[test]
    fn replaces_a_free_variable() {
        assert_eq!(substitute(&Term::var("x"), &x(), &Term::End), Term::End);
    }

    #[test]
    fn renames_a_capturing_binder() {
        let body = Term::lam("y", Term::var("x"));
        let out = substitute(&body, &x(), &Term::var("y"));
        match &out {
            Term::Lam(b, inner) => {
                assert_ne!(b.as_str(), "y");
                assert!(matches!(&**inner, Term::Var(v) if v.as_str() == "y"));
            }
            other => panic!("expected an abstraction, got {other}"),
        }
        assert_eq!(out.free_variables().into_iter().collect::<Vec<_>>(), vec![Name::new("y")]);
    }

    #[test]
    fn bound_occurrences_are_shadowed() {
        let body = Term::lam("x", Term::var("x"));
        assert_eq!(substitute(&body, &x(), &Term::End), body);
    }

    #[test]
    fn renaming_avoids_names_already_in_the_body() {
        // \y. x y'  with x := y must not turn y' into a captured name.
        let body = parse_term("\\y. x y' y").unwrap();
        let out = substitute(&body, &x(), &Term::var("y"));
        let fv: Vec<String> = out.free_variables().iter().map(|n| n.to_string()).collect();
        assert_eq!(fv, vec!["y", "y'"]);
    }

    fn arb_term() -> impl Strategy<Value = Term> {
        let leaf = prop_oneof![
            prop::sample::select(vec!["x", "y", "z"]).prop_map(Term::var),
            Just(Term::End),
            Just(Term::CallCC),
            Just(Term::Read),
        ];
        leaf.prop_recursive(5, 40, 2, |inner| {
            prop_oneof![
                (prop::sample::select(vec!["x", "y", "z"]), inner.clone()).prop_map(|(n, b)| Term::lam(n, b)),
                (inner.clone(), inner).prop_map(|(f, a)| Term::app(f, a)),
            ]
        })
    }

    proptest! {
        #[test]
        fn free_variables_after_substitution(body in arb_term(), arg in arb_term()) {
            let out = substitute(&body, &x(), &arg);
            let mut expected = body.free_variables();
            if expected.remove(&x()) {
                expected.extend(arg.free_variables());
            }
            prop_assert_eq!(out.free_variables(), expected);
        }

        #[test]
        fn proof_likeness_is_stable(body in arb_term(), arg in arb_term()) {
            if body.is_proof_like() && arg.is_proof_like() {
                prop_assert!(substitute(&body, &x(), &arg).is_proof_like());
            }
        }
    }
}
