//! Thompson NFA construction, subset construction and the DFA operations the
//! contract layer needs: membership, complement, intersection, emptiness.

use std::collections::{HashMap, VecDeque};

use super::regex::{symbol, RegexExpr, ALPHABET_SIZE};

/// Set of alphabet symbols, one bit per symbol.
pub type SymSet = u128;

pub const ALL_SYMBOLS: SymSet = (1u128 << ALPHABET_SIZE) - 1;

#[derive(Default)]
struct Nfa {
    eps: Vec<Vec<usize>>,
    edges: Vec<Vec<(SymSet, usize)>>,
}

impl Nfa {
    fn state(&mut self) -> usize {
        self.eps.push(Vec::new());
        self.edges.push(Vec::new());
        self.eps.len() - 1
    }

    /// Builds a fragment for a desugared expression, returning (start, end).
    fn fragment(&mut self, r: &RegexExpr) -> (usize, usize) {
        match r {
            RegexExpr::Literal(s) => {
                let start = self.state();
                let mut cur = start;
                for c in s.chars() {
                    let next = self.state();
                    // Characters outside the alphabet never match.
                    if let Some(sym) = symbol(c) {
                        self.edges[cur].push((1u128 << sym, next));
                    }
                    cur = next;
                }
                (start, cur)
            }
            RegexExpr::Seq(items) => {
                let start = self.state();
                let mut cur = start;
                for item in items {
                    let (s, e) = self.fragment(item);
                    self.eps[cur].push(s);
                    cur = e;
                }
                (start, cur)
            }
            RegexExpr::Alt(items) => {
                let start = self.state();
                let end = self.state();
                if let Some(set) = single_char_set(items) {
                    self.edges[start].push((set, end));
                    return (start, end);
                }
                for item in items {
                    let (s, e) = self.fragment(item);
                    self.eps[start].push(s);
                    self.eps[e].push(end);
                }
                (start, end)
            }
            RegexExpr::Star(inner) => {
                let start = self.state();
                let end = self.state();
                let (s, e) = self.fragment(inner);
                self.eps[start].push(s);
                self.eps[start].push(end);
                self.eps[e].push(s);
                self.eps[e].push(end);
                (start, end)
            }
            sugar => self.fragment(&sugar.desugar()),
        }
    }

    fn closure(&self, seeds: impl IntoIterator<Item = usize>, mark: &mut [u32], stamp: u32) -> Vec<usize> {
        let mut stack: Vec<usize> = Vec::new();
        let mut out = Vec::new();
        for s in seeds {
            if mark[s] != stamp {
                mark[s] = stamp;
                stack.push(s);
            }
        }
        while let Some(s) = stack.pop() {
            out.push(s);
            for &t in &self.eps[s] {
                if mark[t] != stamp {
                    mark[t] = stamp;
                    stack.push(t);
                }
            }
        }
        out.sort_unstable();
        out
    }
}

fn single_char_set(items: &[RegexExpr]) -> Option<SymSet> {
    let mut set: SymSet = 0;
    for item in items {
        match item {
            RegexExpr::Literal(s) => {
                let mut cs = s.chars();
                let c = cs.next()?;
                if cs.next().is_some() {
                    return None;
                }
                if let Some(sym) = symbol(c) {
                    set |= 1u128 << sym;
                }
            }
            _ => return None,
        }
    }
    Some(set)
}

/// Complete deterministic automaton over the printable alphabet.
///
/// Every state has a transition on every symbol; a rejecting sink absorbs
/// everything that cannot lead to acceptance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    trans: Vec<u32>,
    accept: Vec<bool>,
    start: u32,
}

impl Dfa {
    /// Compiles an expression into a minimal DFA accepting exactly its language.
    pub fn compile(r: &RegexExpr) -> Dfa {
        let core = r.desugar();
        let mut nfa = Nfa::default();
        let (start, end) = nfa.fragment(&core);
        let n = nfa.eps.len();
        let mut mark = vec![0u32; n];
        let mut stamp = 1u32;

        let mut ids: HashMap<Vec<usize>, u32> = HashMap::new();
        let mut sets: Vec<Vec<usize>> = Vec::new();
        let mut trans: Vec<u32> = Vec::new();
        let mut accept: Vec<bool> = Vec::new();

        let init = nfa.closure([start], &mut mark, stamp);
        ids.insert(init.clone(), 0);
        accept.push(init.contains(&end));
        sets.push(init);

        let mut i = 0;
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); ALPHABET_SIZE];
        while i < sets.len() {
            for b in buckets.iter_mut() {
                b.clear();
            }
            for &s in &sets[i] {
                for &(set, t) in &nfa.edges[s] {
                    let mut bits = set;
                    while bits != 0 {
                        let sym = bits.trailing_zeros() as usize;
                        buckets[sym].push(t);
                        bits &= bits - 1;
                    }
                }
            }
            let mut row = [0u32; ALPHABET_SIZE];
            for sym in 0..ALPHABET_SIZE {
                stamp += 1;
                let target = nfa.closure(buckets[sym].iter().copied(), &mut mark, stamp);
                let id = match ids.get(&target) {
                    Some(&id) => id,
                    None => {
                        let id = sets.len() as u32;
                        accept.push(target.contains(&end));
                        ids.insert(target.clone(), id);
                        sets.push(target);
                        id
                    }
                };
                row[sym] = id;
            }
            trans.extend_from_slice(&row);
            i += 1;
        }
        Dfa { trans, accept, start: 0 }.minimize()
    }

    /// Automaton accepting every string whose symbols all lie in `allowed`.
    pub fn universal_over(allowed: SymSet) -> Dfa {
        let mut trans = Vec::with_capacity(2 * ALPHABET_SIZE);
        for sym in 0..ALPHABET_SIZE {
            trans.push(if allowed & (1u128 << sym) != 0 { 0 } else { 1 });
        }
        trans.extend(std::iter::repeat_n(1, ALPHABET_SIZE));
        Dfa { trans, accept: vec![true, false], start: 0 }.minimize()
    }

    pub fn start(&self) -> u32 {
        self.start
    }

    pub fn num_states(&self) -> usize {
        self.accept.len()
    }

    #[inline]
    pub fn step(&self, state: u32, sym: usize) -> u32 {
        self.trans[state as usize * ALPHABET_SIZE + sym]
    }

    #[inline]
    pub fn is_accepting(&self, state: u32) -> bool {
        self.accept[state as usize]
    }

    /// Runs the automaton; strings with characters outside the alphabet are rejected.
    pub fn accepts(&self, s: &str) -> bool {
        let mut q = self.start;
        for c in s.chars() {
            match symbol(c) {
                Some(sym) => q = self.step(q, sym),
                None => return false,
            }
        }
        self.is_accepting(q)
    }

    /// Automaton for the complement language (relative to the alphabet).
    pub fn complement(&self) -> Dfa {
        Dfa { trans: self.trans.clone(), accept: self.accept.iter().map(|a| !a).collect(), start: self.start }
    }

    /// Product automaton accepting the intersection of both languages.
    pub fn intersect(&self, other: &Dfa) -> Dfa {
        let mut ids: HashMap<(u32, u32), u32> = HashMap::new();
        let mut queue = VecDeque::new();
        let mut pairs = Vec::new();
        let mut trans = Vec::new();
        let mut accept = Vec::new();
        let init = (self.start, other.start);
        ids.insert(init, 0);
        pairs.push(init);
        queue.push_back(0u32);
        while let Some(id) = queue.pop_front() {
            let (a, b) = pairs[id as usize];
            accept.push(self.is_accepting(a) && other.is_accepting(b));
            for sym in 0..ALPHABET_SIZE {
                let next = (self.step(a, sym), other.step(b, sym));
                let nid = *ids.entry(next).or_insert_with(|| {
                    pairs.push(next);
                    queue.push_back(pairs.len() as u32 - 1);
                    pairs.len() as u32 - 1
                });
                trans.push(nid);
            }
        }
        Dfa { trans, accept, start: 0 }.minimize()
    }

    /// States from which some accepting state is reachable.
    pub fn live_states(&self) -> Vec<bool> {
        let n = self.num_states();
        let mut rev: Vec<Vec<u32>> = vec![Vec::new(); n];
        for q in 0..n {
            for sym in 0..ALPHABET_SIZE {
                let t = self.trans[q * ALPHABET_SIZE + sym] as usize;
                rev[t].push(q as u32);
            }
        }
        let mut live = self.accept.clone();
        let mut stack: Vec<u32> = (0..n as u32).filter(|&q| live[q as usize]).collect();
        while let Some(q) = stack.pop() {
            for &p in &rev[q as usize] {
                if !live[p as usize] {
                    live[p as usize] = true;
                    stack.push(p);
                }
            }
        }
        live
    }

    pub fn is_empty(&self) -> bool {
        !self.live_states()[self.start as usize]
    }

    /// Length of a shortest accepted string, `None` for the empty language.
    pub fn shortest_accepted_len(&self) -> Option<usize> {
        let mut dist = vec![usize::MAX; self.num_states()];
        let mut queue = VecDeque::new();
        dist[self.start as usize] = 0;
        queue.push_back(self.start);
        while let Some(q) = queue.pop_front() {
            if self.is_accepting(q) {
                return Some(dist[q as usize]);
            }
            for sym in 0..ALPHABET_SIZE {
                let t = self.step(q, sym);
                if dist[t as usize] == usize::MAX {
                    dist[t as usize] = dist[q as usize] + 1;
                    queue.push_back(t);
                }
            }
        }
        None
    }

    /// Symbol partition induced by this automaton: two symbols are in the same
    /// class when they move every state to the same successor.
    pub fn symbol_signature(&self, sym: usize) -> Vec<u32> {
        (0..self.num_states()).map(|q| self.trans[q * ALPHABET_SIZE + sym]).collect()
    }

    /// Moore partition refinement.
    fn minimize(self) -> Dfa {
        let n = self.num_states();
        let mut class: Vec<u32> = self.accept.iter().map(|&a| u32::from(a)).collect();
        let mut num_classes = {
            let mut seen = [false; 2];
            for &c in &class {
                seen[c as usize] = true;
            }
            seen.iter().filter(|&&s| s).count()
        };
        loop {
            let mut sig_ids: HashMap<Vec<u32>, u32> = HashMap::new();
            let mut next = vec![0u32; n];
            for q in 0..n {
                let mut sig = Vec::with_capacity(ALPHABET_SIZE + 1);
                sig.push(class[q]);
                for sym in 0..ALPHABET_SIZE {
                    sig.push(class[self.trans[q * ALPHABET_SIZE + sym] as usize]);
                }
                let len = sig_ids.len() as u32;
                next[q] = *sig_ids.entry(sig).or_insert(len);
            }
            let count = sig_ids.len();
            class = next;
            if count == num_classes {
                break;
            }
            num_classes = count;
        }
        // Renumber so that the start state becomes 0 and numbering follows BFS order.
        let mut order: Vec<Option<u32>> = vec![None; num_classes];
        let mut reps: Vec<usize> = Vec::new();
        let mut queue = VecDeque::new();
        let s = class[self.start as usize] as usize;
        order[s] = Some(0);
        reps.push(self.start as usize);
        queue.push_back(self.start as usize);
        while let Some(q) = queue.pop_front() {
            for sym in 0..ALPHABET_SIZE {
                let t = self.trans[q * ALPHABET_SIZE + sym] as usize;
                let c = class[t] as usize;
                if order[c].is_none() {
                    order[c] = Some(reps.len() as u32);
                    reps.push(t);
                    queue.push_back(t);
                }
            }
        }
        let mut trans = Vec::with_capacity(reps.len() * ALPHABET_SIZE);
        let mut accept = Vec::with_capacity(reps.len());
        for &q in &reps {
            accept.push(self.accept[q]);
            for sym in 0..ALPHABET_SIZE {
                let t = self.trans[q * ALPHABET_SIZE + sym] as usize;
                trans.push(order[class[t] as usize].expect("reachable class"));
            }
        }
        Dfa { trans, accept, start: 0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contract::regex::RegexExpr as R;

    fn contains_digit() -> R {
        R::Seq(vec![R::star(R::Any), R::Class(vec![('0', '9')]), R::star(R::Any)])
    }

    #[test]
    fn digit_check_accepts_john42_rejects_john() {
        let d = Dfa::compile(&contains_digit());
        assert!(d.accepts("john42"));
        assert!(!d.accepts("john"));
        assert!(!d.accepts(""));
    }

    #[test]
    fn empty_literal_accepts_only_empty() {
        let d = Dfa::compile(&R::lit(""));
        assert!(d.accepts(""));
        assert!(!d.accepts("a"));
        assert!(!d.accepts(" "));
    }

    #[test]
    fn minimization_collapses_sigma_star() {
        let d = Dfa::compile(&R::star(R::Any));
        assert_eq!(d.num_states(), 1);
        let d = Dfa::compile(&contains_digit());
        assert_eq!(d.num_states(), 2);
    }

    #[test]
    fn complement_and_intersection() {
        let digit = Dfa::compile(&contains_digit());
        let short = Dfa::compile(&R::Repeat(Box::new(R::Any), 2));
        let both = digit.intersect(&short);
        assert!(both.accepts("a1"));
        assert!(!both.accepts("ab"));
        assert!(!both.accepts("a12"));
        let none = digit.complement().intersect(&digit);
        assert!(none.is_empty());
        assert_eq!(digit.shortest_accepted_len(), Some(1));
        assert_eq!(none.shortest_accepted_len(), None);
    }

    #[test]
    fn non_printable_input_is_rejected() {
        let d = Dfa::compile(&R::star(R::Any));
        assert!(!d.accepts("a\tb"));
        assert!(!d.complement().accepts("a\tb"));
    }

    #[test]
    fn universal_over_subset() {
        let set = (1u128 << symbol('a').unwrap()) | (1u128 << symbol('b').unwrap());
        let d = Dfa::universal_over(set);
        assert!(d.accepts("abba"));
        assert!(d.accepts(""));
        assert!(!d.accepts("abc"));
    }
}
