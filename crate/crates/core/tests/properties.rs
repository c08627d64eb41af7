use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kamio::combinators::{compile_function, prelude};
use kamio::equivalence::{beta_contract, beta_redexes, lts_step, top_equiv, weak_bisim};
use kamio::gen::{self, GenConfig};
use kamio::machine::{bin, eval_step, exec_step, run, Action, Bits, ExecutionContext, Outcome};
use kamio::realizability::{
    check_entailment, pole_member, rule_realizer, Hypothesis, Index, Pole, Predicate, RealizerList, Rule, Sequent,
    TraceSpec, TruthValue,
};
use kamio::syntax::{parse_stack, parse_term, parse_term_in, Process, Term};
use kamio::Verdict;

const FUEL: u64 = 10_000;

type Numeric = fn(u64) -> u64;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn any_process(r: &mut ChaCha8Rng) -> Process {
    let cfg = GenConfig::default();
    if r.gen_bool(0.5) {
        gen::program(r, &cfg)
    } else {
        gen::process(r, &cfg)
    }
}

/// A random process together with one of its β-contractions, if it has a redex.
fn contraction(r: &mut ChaCha8Rng) -> Option<(Process, Process)> {
    let p = any_process(r);
    let redexes = beta_redexes(&p);
    let at = redexes.get(r.gen_range(0..redexes.len().max(1)))?;
    Some((p.clone(), beta_contract(&p, at).unwrap()))
}

fn is_io_head(p: &Process) -> bool {
    matches!(p, Process::Pair(Term::Read | Term::Write0 | Term::Write1 | Term::End, _))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn exec_step_is_conservative(seed in any::<u64>()) {
        let c = gen::context(&mut rng(seed), &GenConfig::default());
        if let Some(q) = eval_step(&c.process) {
            prop_assert!(!is_io_head(&c.process));
            let expected = ExecutionContext::new(q, c.input.clone(), c.output.clone());
            prop_assert_eq!(exec_step(&c), Some((Action::Tau, expected)));
        }
    }

    #[test]
    fn runs_only_consume_input_and_prepend_output(seed in any::<u64>()) {
        let mut c = gen::context(&mut rng(seed), &GenConfig::default());
        for _ in 0..2000 {
            let before = c.clone();
            let Some(a) = c.step() else { break };
            let (mut input, mut output) = (before.input.clone(), before.output.clone());
            match a {
                Action::R0 | Action::R1 => {
                    prop_assert_eq!(input.pop_front(), Some(a == Action::R1));
                }
                Action::W0 | Action::W1 => output.push_front(a == Action::W1),
                _ => {}
            }
            prop_assert_eq!(&c.input, &input);
            prop_assert_eq!(&c.output, &output);
        }
    }

    #[test]
    fn termination_is_stable_under_more_fuel(seed in any::<u64>(), extra in 0u64..500) {
        let c = gen::context(&mut rng(seed), &GenConfig::default());
        let short = run(c.clone(), 200);
        if short.outcome == Outcome::Terminated {
            let long = run(c, 200 + extra);
            prop_assert_eq!(long.outcome, Outcome::Terminated);
            prop_assert_eq!(long.last, short.last);
        }
    }

    #[test]
    fn tau_transitions_are_evaluation(seed in any::<u64>()) {
        let p = any_process(&mut rng(seed));
        let taus: Vec<Process> = lts_step(&p).into_iter().filter(|(a, _)| a.is_tau()).map(|(_, q)| q).collect();
        prop_assert_eq!(taus, eval_step(&p).into_iter().collect::<Vec<_>>());
    }

    #[test]
    fn each_label_has_at_most_one_successor(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut p = any_process(&mut r);
        for _ in 0..50 {
            let moves = lts_step(&p);
            for a in Action::LABELS.iter().chain([&Action::Tau]) {
                prop_assert!(moves.iter().filter(|(b, _)| b == a).count() <= 1, "{} from {}", a, p);
            }
            let Some((_, next)) = moves.get(r.gen_range(0..moves.len().max(1))) else { break };
            p = next.clone();
        }
    }

    #[test]
    fn contraction_preserves_weak_bisimilarity(seed in any::<u64>()) {
        if let Some((p, q)) = contraction(&mut rng(seed)) {
            let v = weak_bisim(&p, &q, 6, FUEL);
            prop_assert!(!v.is_refuted(), "{} / {}: {:?}", p, q, v);
        }
    }

    #[test]
    fn bisimilar_processes_are_top_equivalent(seed in any::<u64>()) {
        let mut r = rng(seed);
        if let Some((p, q)) = contraction(&mut r) {
            if weak_bisim(&p, &q, 8, FUEL).is_verified() {
                let iota = gen::bits(&mut r, 6);
                let o = gen::bits(&mut r, 2);
                let v = top_equiv(
                    &ExecutionContext::new(p.clone(), iota.clone(), o.clone()),
                    &ExecutionContext::new(q.clone(), iota, o),
                    FUEL,
                );
                prop_assert!(!v.is_refuted(), "{} / {}: {:?}", p, q, v);
            }
        }
    }

    #[test]
    fn finite_poles_are_saturated(seed in any::<u64>(), back in 1usize..20) {
        let mut c = gen::context(&mut rng(seed), &GenConfig { effects: false, ..GenConfig::default() });
        let mut chain = vec![c.process.clone()];
        while chain.len() < 40 {
            match eval_step(&c.process) {
                Some(q) => {
                    c.process = q.clone();
                    chain.push(q);
                }
                None => break,
            }
        }
        let seed_at = chain.len() - 1;
        let pole = Pole::Finite { seeds: vec![chain[seed_at].clone()], fuel: 1000 };
        let start = seed_at.saturating_sub(back);
        for p in &chain[start..] {
            prop_assert!(pole_member(&pole, p, 1000).is_verified());
        }
    }

    #[test]
    fn union_membership_follows_members(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = any_process(&mut r);
        let members = vec![
            Pole::Finite { seeds: vec![any_process(&mut r)], fuel: 200 },
            Pole::Trace { spec: TraceSpec::Copy, max_input_len: 2, fuel: 2000 },
        ];
        let verdicts: Vec<_> = members.iter().map(|m| pole_member(m, &p, 2000)).collect();
        let union = pole_member(&Pole::Union(members), &p, 2000);
        if verdicts.iter().any(Verdict::is_verified) {
            prop_assert!(union.is_verified());
        } else if verdicts.iter().all(Verdict::is_refuted) {
            prop_assert!(union.is_refuted());
        } else {
            prop_assert!(union.is_unknown());
        }
    }

    #[test]
    fn bisimilar_processes_share_pole_membership(seed in any::<u64>()) {
        let mut r = rng(seed);
        if let Some((p, q)) = contraction(&mut r) {
            if weak_bisim(&p, &q, 12, FUEL).is_verified() {
                let poles = [
                    Pole::Trace { spec: TraceSpec::Copy, max_input_len: 3, fuel: FUEL },
                    Pole::Trace { spec: TraceSpec::ReadAllThenWrite, max_input_len: 3, fuel: FUEL },
                    Pole::Function { table: (0..4).map(|n| (n, n)).collect(), fuel: FUEL },
                ];
                for pole in &poles {
                    let (a, b) = (pole_member(pole, &p, FUEL), pole_member(pole, &q, FUEL));
                    if !a.is_unknown() && !b.is_unknown() {
                        prop_assert_eq!(a.is_verified(), b.is_verified(), "{} / {}", p, q);
                    }
                }
            }
        }
    }
}

#[test]
fn compiled_functions_leave_no_input() {
    let fs: [(&str, Numeric); 3] = [("\\x. x", |n| n), ("S", |n| n + 1), ("\\n. n (\\m. S (S m)) #0", |n| 2 * n)];
    for (src, f) in fs {
        let p = compile_function(&parse_term_in(src, prelude()).unwrap()).unwrap();
        for n in 0..=12 {
            let r = run(ExecutionContext::start(p.clone(), bin(n)), 1_000_000);
            assert!(r.terminated_with(&Bits::new(), &bin(f(n))), "{src} on {n}: {:?}", r.last);
        }
        let table: BTreeMap<u64, u64> = (0..=12).map(|n| (n, f(n))).collect();
        let pole = Pole::Function { table, fuel: 1_000_000 };
        assert!(pole_member(&pole, &p, 1_000_000).is_verified(), "{src}");
    }
}

#[test]
fn top_is_absorbing() {
    for input in ["", "0", "101"] {
        let c = ExecutionContext::start(Process::Top, input.parse().unwrap());
        assert_eq!(exec_step(&c), None);
        assert!(lts_step(&Process::Top).is_empty());
    }
}

fn idx() -> Index {
    Index::from("i")
}

fn at_i(l: &RealizerList) -> BTreeMap<Index, RealizerList> {
    [(idx(), l.clone())].into()
}

#[test]
fn rule_suite_on_sampled_poles() {
    let mut r = rng(11);
    for _ in 0..20 {
        // φ1 = {#a :: ρ}, φ2 = {#b :: #c :: ρ}, with the pole generated by end ⋆ ρ.
        let depth = r.gen_range(0..3);
        let rho = parse_stack(&format!("{}nil", "(\\z. z) :: ".repeat(depth))).unwrap();
        let pole = Pole::Finite { seeds: vec![Process::Pair(Term::End, rho.clone())], fuel: 500 };
        let num = |n: u64| parse_term_in(&format!("#{n}"), prelude()).unwrap();
        let phi1 = TruthValue::of([rho.push(num(r.gen_range(0..4))).unwrap()]);
        let phi2 = TruthValue::of([rho.push(num(1)).unwrap().push(num(r.gen_range(0..4))).unwrap()]);
        let r1 = RealizerList::new([parse_term("\\x. end").unwrap()]).unwrap();
        let r2 = RealizerList::new([parse_term("\\x y. end").unwrap()]).unwrap();
        let pred = |v: &TruthValue| Predicate::new([(idx(), v.clone())]);
        let hyp = |l: &RealizerList, v: &TruthValue| Hypothesis { predicate: pred(v), realizers: at_i(l) };

        // From φ1, φ2 ⊢ φ2 (second projection), φ2, φ1 ⊢ φ2.
        let snd = parse_term("\\a b. b").unwrap();
        let premise = Sequent { hypotheses: vec![hyp(&r1, &phi1), hyp(&r2, &phi2)], conclusion: pred(&phi2), candidate: snd.clone() };
        assert!(check_entailment(&pole, &premise, 500).unwrap().verdict.is_verified());
        let swapped = Sequent {
            hypotheses: vec![hyp(&r2, &phi2), hyp(&r1, &phi1)],
            conclusion: pred(&phi2),
            candidate: rule_realizer(&Rule::Exchange { t: snd.clone(), sigma: vec![2, 1] }).unwrap(),
        };
        let v = check_entailment(&pole, &swapped, 500).unwrap().verdict;
        assert!(!v.is_refuted(), "{v:?}");

        for (rule, hyps) in [
            (Rule::Ax, vec![hyp(&r2, &phi2)]),
            (Rule::Weaken(rule_realizer(&Rule::Ax).unwrap()), vec![hyp(&r1, &phi1), hyp(&r2, &phi2)]),
            (Rule::Contract(parse_term("\\a b. a").unwrap()), vec![hyp(&r2, &phi2)]),
        ] {
            let seq = Sequent { hypotheses: hyps, conclusion: pred(&phi2), candidate: rule_realizer(&rule).unwrap() };
            let v = check_entailment(&pole, &seq, 500).unwrap().verdict;
            assert!(!v.is_refuted(), "{rule:?}: {v:?}");
        }
    }
}
