//! Randomised invariants of the tree kernels and the path tools.

use cps_lab::arbitrage::brute_force_arbitrage;
use cps_lab::corpus::{instance_rng, random_market, random_stock, random_supermartingale, random_tree};
use cps_lab::doob::{doob_decompose, DoobMode};
use cps_lab::ledger::{cost_value, liquidation_value, minimal_shift, shifted_liquidation};
use cps_lab::oracle::oracle_envelopes;
use cps_lab::pathlab::excursions::{detect_excursions, dormant_transform, ExcursionOptions};
use cps_lab::pathlab::uniform_grid;
use cps_lab::scalar::rat;
use cps_lab::{
    check_na_nf, check_na_ps, compute_envelopes, duality_check, portfolio_values, wealth_ledger, EnvelopePair, Rational,
    Scalar,
};
use proptest::prelude::*;

fn market(seed: u64, depth: usize, branching: usize) -> cps_lab::ExactMarket {
    let mut rng = instance_rng(seed, 0);
    let tree = random_tree(&mut rng, depth, branching);
    random_market(&mut rng, &tree)
}

fn quarter(n: i64) -> Rational {
    rat(n, 4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn envelopes_sit_inside_quotes_and_match_the_path_oracle(seed in any::<u64>()) {
        let m = market(seed, 4, 3);
        let env = compute_envelopes(&m);
        for id in m.tree.ids() {
            prop_assert!(env.x_bid[id] >= m.bid[id]);
            prop_assert!(env.x_ask[id] <= m.ask[id]);
            if m.tree.is_leaf(id) {
                prop_assert_eq!(&env.x_bid[id], &m.bid[id]);
                prop_assert_eq!(&env.x_ask[id], &m.ask[id]);
            }
        }
        prop_assert_eq!(oracle_envelopes(&m), env);
    }

    #[test]
    fn envelopes_are_idempotent(seed in any::<u64>()) {
        let m = market(seed, 4, 3);
        let env = compute_envelopes(&m);
        prop_assert_eq!(compute_envelopes(&env.as_market(&m.tree)), env);
    }

    #[test]
    fn envelopes_are_monotone_in_the_quotes(seed in any::<u64>(), widen in 0i64..4) {
        let m = market(seed, 4, 3);
        let mut wide = m.clone();
        for id in m.tree.ids() {
            let w = quarter(widen);
            wide.bid.set(id, (m.bid[id].clone() - w.clone()).max(rat(0, 1)));
            wide.ask.set(id, m.ask[id].clone() + w);
        }
        let (narrow, wide) = (compute_envelopes(&m), compute_envelopes(&wide));
        for id in m.tree.ids() {
            prop_assert!(wide.x_bid[id] <= narrow.x_bid[id]);
            prop_assert!(wide.x_ask[id] >= narrow.x_ask[id]);
        }
    }

    #[test]
    fn envelopes_scale_with_prices(seed in any::<u64>(), num in 1i64..7, den in 1i64..5) {
        let m = market(seed, 3, 3);
        let c = rat(num, den);
        let scaled = compute_envelopes(&m.scaled(&c));
        let env = compute_envelopes(&m);
        for id in m.tree.ids() {
            prop_assert_eq!(&scaled.x_bid[id], &(env.x_bid[id].clone() * c.clone()));
            prop_assert_eq!(&scaled.x_ask[id], &(env.x_ask[id].clone() * c.clone()));
        }
    }

    #[test]
    fn ledger_is_positively_homogeneous(seed in any::<u64>(), num in 0i64..9, den in 1i64..5) {
        let m = market(seed, 4, 3);
        let prices = EnvelopePair::raw(&m);
        let stock = random_stock(&mut instance_rng(seed, 1), &m.tree, 2);
        let c = rat(num, den);
        let base = wealth_ledger(&m, &prices, &stock).unwrap();
        let scaled_stock = stock.map(stock.role, |v| v.clone() * c.clone());
        let scaled = wealth_ledger(&m, &prices, &scaled_stock).unwrap();
        prop_assert_eq!(&scaled, &base.scaled(&c));
        let (pb, ps) = (portfolio_values(&m.tree, &base, &prices), portfolio_values(&m.tree, &scaled, &prices));
        for id in m.tree.ids() {
            prop_assert_eq!(&ps.v_liq[id], &(pb.v_liq[id].clone() * c.clone()));
            prop_assert_eq!(&ps.v_cost[id], &(pb.v_cost[id].clone() * c.clone()));
        }
    }

    #[test]
    fn round_trip_costs_the_spread(seed in any::<u64>()) {
        let m = market(seed, 3, 2);
        let prices = EnvelopePair::raw(&m);
        let stock = random_stock(&mut instance_rng(seed, 2), &m.tree, 1);
        let s = wealth_ledger(&m, &prices, &stock).unwrap();
        let pv = portfolio_values(&m.tree, &s, &prices);
        for id in m.tree.ids() {
            prop_assert!(pv.v_liq[id] <= pv.v_cost[id]);
            // Undoing the whole position right after entering never gains.
            if m.tree.parent(id).is_none() {
                prop_assert!(pv.v_liq[id] <= rat(0, 1));
            }
            let p = m.tree.parent(id).map_or(pv.v_cost[id].clone(), |p| pv.a_sup[p].clone());
            prop_assert_eq!(&pv.a_sup[id], &p.max_of(pv.v_cost[id].clone()));
            prop_assert!(pv.m_star >= rat(0, 1));
        }
    }

    #[test]
    fn minimal_shift_is_the_smallest_root(b in -40i64..40, s in -40i64..40, lo in 1i64..20, sp in 0i64..8) {
        let (bond, stock, bid) = (quarter(b), quarter(s), quarter(lo));
        let ask = bid.clone() + quarter(sp);
        let m = minimal_shift(&bond, &stock, &bid, &ask);
        prop_assert!(m >= rat(0, 1));
        prop_assert!(shifted_liquidation(&bond, &stock, &m, &bid, &ask) >= rat(0, 1));
        if m.is_pos() {
            prop_assert_eq!(shifted_liquidation(&bond, &stock, &m, &bid, &ask), rat(0, 1));
        }
        prop_assert!(liquidation_value(&bond, &stock, &bid, &ask) <= cost_value(&bond, &stock, &bid, &ask));
    }

    #[test]
    fn doob_drift_is_predictable_and_martingale_part_fair(seed in any::<u64>()) {
        let case = random_supermartingale(&mut instance_rng(seed, 3), 4, 3);
        let d = doob_decompose(&case.tree, &case.y, DoobMode::Supermartingale).unwrap();
        let tree = &case.tree;
        prop_assert_eq!(&d.drift[tree.root()], &rat(0, 1));
        for id in tree.ids() {
            prop_assert_eq!(&d.martingale[id], &(case.y[id].clone() + d.drift[id].clone()));
            let kids = tree.children(id);
            if kids.is_empty() {
                continue;
            }
            prop_assert_eq!(&tree.cond_exp(id, &d.martingale), &d.martingale[id]);
            for &c in kids {
                prop_assert_eq!(&d.drift[c], &d.drift[kids[0]]);
                prop_assert!(d.drift[c] >= d.drift[id]);
            }
        }
    }

    #[test]
    fn dormant_wealth_is_frozen_on_excursions(
        spread in prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..0.5], 2..80),
        wealth in prop::collection::vec(-5.0f64..5.0, 80),
    ) {
        let n = spread.len();
        let times = uniform_grid(1.0, n - 1);
        let wealth = &wealth[..n];
        let opts = ExcursionOptions::default();
        let dec = detect_excursions(&times, &spread, &opts);
        let out = dormant_transform(&times, &spread, wealth, &opts);
        for (i, &s) in spread.iter().enumerate() {
            match dec.containing(i) {
                None => prop_assert!(s <= opts.eps && out[i] == wealth[i]),
                Some(e) => {
                    prop_assert!(e.start <= i && i < e.end);
                    if i >= e.first_positive() {
                        prop_assert_eq!(out[i], out[e.first_positive()]);
                    }
                }
            }
            if s <= opts.eps {
                prop_assert_eq!(out[i], wealth[i]);
            }
        }
        for w in dec.excursions.windows(2) {
            prop_assert!(w[0].end <= w[1].start);
        }
        prop_assert_eq!(dormant_transform(&times, &spread, &out, &opts), out);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn duality_holds_on_random_trees(seed in any::<u64>()) {
        let m = market(seed, 3, 3);
        let env = compute_envelopes(&m);
        let report = duality_check(&m, &env).unwrap();
        prop_assert!(report.consistent);
        let brute = brute_force_arbitrage(&m, &env, 64).unwrap();
        prop_assert_eq!(brute.holds, report.na_nf.holds);
    }

    #[test]
    fn prospective_condition_is_stronger(seed in any::<u64>()) {
        let m = market(seed, 3, 3);
        let env = compute_envelopes(&m);
        let ps = check_na_ps(&m, &env).unwrap();
        let nf = check_na_nf(&m, &env).unwrap();
        prop_assert!(!ps.holds || nf.holds);
    }

    #[test]
    fn exact_and_float_kernels_agree(seed in any::<u64>()) {
        let m = market(seed, 3, 3);
        let fm: cps_lab::FloatMarket = m.convert();
        let (exact, float) = (compute_envelopes(&m), compute_envelopes(&fm));
        for id in m.tree.ids() {
            prop_assert!((exact.x_bid[id].as_f64() - float.x_bid[id]).abs() < 1e-12);
            prop_assert!((exact.x_ask[id].as_f64() - float.x_ask[id]).abs() < 1e-12);
        }
        let verdict = check_na_nf(&fm, &float).unwrap();
        prop_assert_eq!(verdict.holds, check_na_nf(&m, &exact).unwrap().holds);
    }
}
