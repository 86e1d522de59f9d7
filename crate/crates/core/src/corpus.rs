//! Seeded random trees, markets, strategies and supermartingales.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::{rat, Rational, Scalar};
use crate::tree::{EventTree, MarketModel, NodeId, Role, TreeProcess};

/// Independent generator for instance `k` of a run seeded with `seed`.
pub fn instance_rng(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

/// Tree with horizon in `1..=max_depth`, branching in `1..=max_branching`
/// per node, and random rational transition weights.
pub fn random_tree<R: Rng>(rng: &mut R, max_depth: usize, max_branching: usize) -> EventTree<Rational> {
    let horizon = rng.random_range(1..=max_depth);
    let mut parents: Vec<Option<usize>> = vec![None];
    let mut weights: Vec<Rational> = vec![rat(1, 1)];
    let mut frontier = vec![0usize];
    for _ in 0..horizon {
        let mut next = Vec::new();
        for &p in &frontier {
            let k = rng.random_range(1..=max_branching);
            let raw: Vec<i64> = (0..k).map(|_| rng.random_range(1..=4)).collect();
            let total: i64 = raw.iter().sum();
            for w in raw {
                parents.push(Some(p));
                weights.push(rat(w, total));
                next.push(parents.len() - 1);
            }
        }
        frontier = next;
    }
    EventTree::from_parents(&parents, &weights).expect("generated tree is valid")
}

/// Bid-ask market from a random mid-price walk with random half-spreads.
///
/// Mid prices move on a quarter grid and stay at least 1/2; roughly half of
/// the generated markets admit numéraire-free arbitrage.
pub fn random_market<R: Rng>(rng: &mut R, tree: &EventTree<Rational>) -> MarketModel<Rational> {
    let mut mid = vec![rat(0, 1); tree.len()];
    for id in tree.ids() {
        mid[id.0] = match tree.parent(id) {
            None => rat(rng.random_range(4..=12), 4),
            Some(p) => {
                let step = rat(rng.random_range(-3..=3), 4);
                (mid[p.0].clone() + step).max(rat(1, 2))
            }
        };
    }
    MarketModel::from_fn(tree.clone(), |id| {
        let half = rat([0, 0, 1, 1, 2][rng.random_range(0..5)], 8);
        let bid = (mid[id.0].clone() - half.clone()).max(rat(0, 1));
        (bid, mid[id.0].clone() + half)
    })
}

/// Random stock holdings on a small integer/quarter grid, with a fraction of
/// nodes keeping the parent's holding.
pub fn random_stock<R: Rng>(rng: &mut R, tree: &EventTree<Rational>, scale: i64) -> TreeProcess<Rational> {
    let mut stock = TreeProcess::zeros(tree, Role::StrategyStock);
    for id in tree.ids() {
        let keep = tree.parent(id).is_some() && rng.random_bool(0.3);
        let v = if keep {
            stock[tree.parent(id).expect("non-root")].clone()
        } else {
            rat(rng.random_range(-4 * scale..=4 * scale), 4)
        };
        stock.set(id, v);
    }
    stock
}

/// Supermartingale instance with its declared tolerances.
#[derive(Clone, Debug)]
pub struct SupermartingaleCase {
    pub tree: EventTree<Rational>,
    pub y: TreeProcess<Rational>,
    pub eps1: Rational,
    pub eps2: Rational,
    pub eps3: Rational,
}

/// Random supermartingale with `Y_0 = 0` and `-1 ≤ Y ≤ eps1`.
///
/// Each step subtracts a random drift and adds a centred random move, scaled
/// down as needed to stay within the bounds. `eps3` is the exact probability
/// of `Y_T < -eps2` plus a random nonnegative margin.
pub fn random_supermartingale<R: Rng>(rng: &mut R, max_depth: usize, max_branching: usize) -> SupermartingaleCase {
    let tree = random_tree(rng, max_depth, max_branching);
    let grid = [1i64, 2, 5, 10, 20, 50];
    let eps1 = rat(grid[rng.random_range(0..grid.len())], 100);
    let eps2 = rat(grid[rng.random_range(0..grid.len())], 100);
    let amplitude = rat(rng.random_range(1..=20), 20);
    let mut y = TreeProcess::zeros(&tree, Role::Generic);
    for id in tree.ids() {
        let ch = tree.children(id);
        if ch.is_empty() {
            continue;
        }
        let here = y[id].clone();
        // Drift up to the distance to the floor, mostly small.
        let room = here.clone() + rat(1, 1);
        let drift = if rng.random_bool(0.5) { rat(0, 1) } else { room * rat(rng.random_range(0..=10), 100) };
        let base = here - drift;
        let raw: Vec<Rational> = ch.iter().map(|_| rat(rng.random_range(-20..=20), 20) * amplitude.clone()).collect();
        let mean = ch.iter().zip(&raw).fold(rat(0, 1), |acc, (c, z)| acc + tree.weight(*c).clone() * z.clone());
        let centred: Vec<Rational> = raw.into_iter().map(|z| z - mean.clone()).collect();
        let up_room = eps1.clone() - base.clone();
        let down_room = base.clone() + rat(1, 1);
        let mut lambda = rat(1, 1);
        for z in &centred {
            if z.is_pos() && z.clone() * lambda.clone() > up_room {
                lambda = up_room.clone() / z.clone();
            }
            if z.is_neg() && -(z.clone()) * lambda.clone() > down_room {
                lambda = down_room.clone() / -(z.clone());
            }
        }
        for (c, z) in ch.iter().zip(centred) {
            y.set(*c, base.clone() + z * lambda.clone());
        }
    }
    let tail = tree.expect_terminal(|l| if y[l] < -eps2.clone() { rat(1, 1) } else { rat(0, 1) });
    let margin = rat([0, 0, 1, 5, 10][rng.random_range(0..5)], 100);
    let mut eps3 = tail + margin;
    if !eps3.is_pos() {
        eps3 = rat(1, 1000);
    }
    SupermartingaleCase { tree, y, eps1, eps2, eps3 }
}

/// Binary kill process: from 0, each step either stays at 0 or drops to -1
/// for good with probability `q`. Its drift accumulates like a truncated
/// geometric clock.
pub fn kill_process(steps: usize, q: Rational) -> (EventTree<Rational>, TreeProcess<Rational>) {
    let mut parents: Vec<Option<usize>> = vec![None];
    let mut weights = vec![rat(1, 1)];
    let mut values = vec![rat(0, 1)];
    let mut alive = vec![0usize];
    let mut dead: Vec<usize> = Vec::new();
    for _ in 0..steps {
        let (mut next_alive, mut next_dead) = (Vec::new(), Vec::new());
        for &a in &alive {
            parents.push(Some(a));
            weights.push(rat(1, 1) - q.clone());
            values.push(rat(0, 1));
            next_alive.push(parents.len() - 1);
            parents.push(Some(a));
            weights.push(q.clone());
            values.push(rat(-1, 1));
            next_dead.push(parents.len() - 1);
        }
        for &d in &dead {
            parents.push(Some(d));
            weights.push(rat(1, 1));
            values.push(rat(-1, 1));
            next_dead.push(parents.len() - 1);
        }
        alive = next_alive;
        dead = next_dead;
    }
    let tree = EventTree::from_parents(&parents, &weights).expect("valid chain");
    let y = TreeProcess::from_fn(&tree, Role::Generic, |id: NodeId| {
        values[tree.label(id).parse::<usize>().expect("numeric label")].clone()
    });
    (tree, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::validate_market;

    #[test]
    fn deterministic_given_seed() {
        let a = random_tree(&mut instance_rng(7, 3), 4, 3);
        let b = random_tree(&mut instance_rng(7, 3), 4, 3);
        assert_eq!(a.len(), b.len());
        let ma = random_market(&mut instance_rng(7, 4), &a);
        let mb = random_market(&mut instance_rng(7, 4), &b);
        assert_eq!(ma.bid, mb.bid);
    }

    #[test]
    fn markets_are_valid() {
        for k in 0..50 {
            let mut rng = instance_rng(1, k);
            let t = random_tree(&mut rng, 4, 3);
            assert!(validate_market(&random_market(&mut rng, &t)).is_empty());
        }
    }

    #[test]
    fn supermartingales_respect_bounds() {
        for k in 0..50 {
            let c = random_supermartingale(&mut instance_rng(2, k), 4, 3);
            assert_eq!(c.y[c.tree.root()], rat(0, 1));
            for id in c.tree.ids() {
                assert!(c.y[id] >= rat(-1, 1) && c.y[id] <= c.eps1);
                if !c.tree.is_leaf(id) {
                    assert!(c.tree.cond_exp(id, &c.y) <= c.y[id]);
                }
            }
        }
    }

    #[test]
    fn kill_process_shape() {
        let (tree, y) = kill_process(3, rat(1, 3));
        assert_eq!(tree.horizon(), 3);
        let alive_end = tree.expect_terminal(|l| if y[l] == rat(0, 1) { rat(1, 1) } else { rat(0, 1) });
        assert_eq!(alive_end, rat(8, 27));
    }
}
