use std::collections::{HashMap, HashSet};

use crate::gate::{Command, QubitId};

use super::Placement;

/// Chains of qubits built while scanning commands.
#[derive(Default)]
struct Chains {
    chains: Vec<Vec<QubitId>>,
    chain_of: HashMap<QubitId, usize>,
}

impl Chains {
    fn at_end(&self, q: QubitId) -> Option<(usize, bool)> {
        let c = *self.chain_of.get(&q)?;
        let chain = &self.chains[c];
        if chain.first() == Some(&q) {
            Some((c, true))
        } else if chain.last() == Some(&q) {
            Some((c, false))
        } else {
            None
        }
    }

    fn adjacent(&self, a: QubitId, b: QubitId) -> bool {
        match (self.chain_of.get(&a), self.chain_of.get(&b)) {
            (Some(ca), Some(cb)) if ca == cb => self.chains[*ca]
                .windows(2)
                .any(|w| (w[0] == a && w[1] == b) || (w[0] == b && w[1] == a)),
            _ => false,
        }
    }

    fn new_chain(&mut self, a: QubitId, b: QubitId) {
        let idx = self.chains.len();
        self.chains.push(vec![a, b]);
        self.chain_of.insert(a, idx);
        self.chain_of.insert(b, idx);
    }

    fn attach(&mut self, chain: usize, front: bool, q: QubitId) {
        if front {
            self.chains[chain].insert(0, q);
        } else {
            self.chains[chain].push(q);
        }
        self.chain_of.insert(q, chain);
    }

    /// Joins the chains of `a` and `b` so that they become neighbors.
    fn join(&mut self, (ca, a_front): (usize, bool), (cb, b_front): (usize, bool)) {
        let mut left = std::mem::take(&mut self.chains[ca]);
        let mut right = std::mem::take(&mut self.chains[cb]);
        if a_front {
            left.reverse();
        }
        if !b_front {
            right.reverse();
        }
        left.extend(right);
        for q in &left {
            self.chain_of.insert(*q, ca);
        }
        self.chains[ca] = left;
    }

    /// Tries to make `a` and `b` neighbors; false if the request is deferred.
    fn link(&mut self, a: QubitId, b: QubitId) -> bool {
        if self.adjacent(a, b) {
            return true;
        }
        let placed = (self.chain_of.contains_key(&a), self.chain_of.contains_key(&b));
        match placed {
            (false, false) => {
                self.new_chain(a, b);
                true
            }
            (true, false) | (false, true) => {
                let (p, u) = if placed.0 { (a, b) } else { (b, a) };
                match self.at_end(p) {
                    Some((c, front)) => {
                        self.attach(c, front, u);
                        true
                    }
                    None => false,
                }
            }
            (true, true) => match (self.at_end(a), self.at_end(b)) {
                (Some(ea), Some(eb)) if ea.0 != eb.0 => {
                    self.join(ea, eb);
                    true
                }
                _ => false,
            },
        }
    }
}

/// Linear order of the qubits of `current` that places the qubits of as many
/// leading two-qubit commands of `pending` next to each other as the greedy
/// chain construction allows.
///
/// Commands are scanned in order. A two-qubit command starts a new chain,
/// extends a chain at one of its ends, or joins two chains end to end. If
/// none applies, the command is deferred and its qubits are frozen for the
/// rest of the scan so later commands cannot overtake it. Chains and
/// unconstrained qubits are then sorted by their mean current position, with
/// each chain oriented along the current layout.
pub fn greedy_order(pending: &[Command], current: &Placement) -> Vec<QubitId> {
    let mut chains = Chains::default();
    let mut frozen: HashSet<QubitId> = HashSet::new();
    for cmd in pending {
        let qs: Vec<QubitId> = cmd.qubits().collect();
        if cmd.all_qubits().any(|q| frozen.contains(&q)) {
            frozen.extend(cmd.all_qubits());
            continue;
        }
        if qs.len() == 2 && !chains.link(qs[0], qs[1]) {
            frozen.extend(cmd.all_qubits());
        }
    }

    let pos = |q: &QubitId| current.position(*q).unwrap_or(usize::MAX) as f64;
    let mut units: Vec<Vec<QubitId>> = chains
        .chains
        .into_iter()
        .filter(|c| !c.is_empty())
        .map(|mut c| {
            if pos(&c[0]) > pos(&c[c.len() - 1]) {
                c.reverse();
            }
            c
        })
        .collect();
    units.extend(
        current
            .qubits()
            .filter(|q| !chains.chain_of.contains_key(q))
            .map(|q| vec![q]),
    );
    let key = |u: &Vec<QubitId>| {
        let mean = u.iter().map(pos).sum::<f64>() / u.len() as f64;
        let min_id = u.iter().min().copied().unwrap_or(QubitId(0));
        (mean, min_id)
    };
    units.sort_by(|a, b| {
        let (ma, ia) = key(a);
        let (mb, ib) = key(b);
        ma.total_cmp(&mb).then(ia.cmp(&ib))
    });
    units.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::GateKind;

    fn q(i: u32) -> QubitId {
        QubitId(i)
    }

    fn line(n: u32) -> Placement {
        Placement::from_pairs(n as usize, (0..n).map(|i| (q(i), i as usize))).unwrap()
    }

    fn chain_adjacent(order: &[QubitId], a: QubitId, b: QubitId) -> bool {
        order
            .windows(2)
            .any(|w| (w[0] == a && w[1] == b) || (w[0] == b && w[1] == a))
    }

    #[test]
    fn extends_chain() {
        let order = greedy_order(&[Command::cnot(q(0), q(3)), Command::cnot(q(3), q(1))], &line(4));
        assert!(chain_adjacent(&order, q(0), q(3)));
        assert!(chain_adjacent(&order, q(3), q(1)));
    }

    #[test]
    fn joins_two_chains() {
        let (a, b, c, d) = (q(0), q(2), q(4), q(5));
        let order = greedy_order(
            &[Command::cnot(a, b), Command::cnot(c, d), Command::cnot(b, c)],
            &line(6),
        );
        let pos: Vec<usize> = [a, b, c, d]
            .iter()
            .map(|x| order.iter().position(|y| y == x).unwrap())
            .collect();
        assert!(pos.windows(2).all(|w| w[1] == w[0] + 1), "{order:?}");
    }

    #[test]
    fn single_qubit_gates_keep_order() {
        let order = greedy_order(&[Command::single(GateKind::H, q(2))], &line(4));
        assert_eq!(order, vec![q(0), q(1), q(2), q(3)]);
    }

    #[test]
    fn interior_request_is_deferred() {
        // 1 is interior of 0-1-2, so (1,3) is deferred and freezes 3
        let order = greedy_order(
            &[
                Command::cnot(q(0), q(1)),
                Command::cnot(q(1), q(2)),
                Command::cnot(q(1), q(3)),
                Command::cnot(q(3), q(4)),
            ],
            &line(5),
        );
        assert!(chain_adjacent(&order, q(0), q(1)));
        assert!(chain_adjacent(&order, q(1), q(2)));
        assert_eq!(order, vec![q(0), q(1), q(2), q(3), q(4)]);
    }
}
