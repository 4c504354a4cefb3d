//! Variation operators on strings and integers, and tournament selection.

use rand::Rng;

use crate::sampler::Domain;

/// Removes the character at `i`.
pub fn delete_char(s: &str, i: usize) -> String {
    s.chars().enumerate().filter(|&(j, _)| j != i).map(|(_, c)| c).collect()
}

/// Inserts `c` before position `i` (`i == len` appends).
pub fn insert_char(s: &str, i: usize, c: char) -> String {
    let mut v: Vec<char> = s.chars().collect();
    v.insert(i, c);
    v.into_iter().collect()
}

/// Replaces the character at `i` with `c`.
pub fn modify_char(s: &str, i: usize, c: char) -> String {
    s.chars().enumerate().map(|(j, d)| if j == i { c } else { d }).collect()
}

/// One random deletion, insertion or modification that keeps the string
/// within the domain.
pub fn mutate_string<R: Rng>(s: &str, domain: &Domain, rng: &mut R) -> String {
    let n = s.chars().count();
    let can_insert = n < domain.max_str_len;
    let op = match (n, can_insert) {
        (0, true) => 1,
        (0, false) => return s.to_string(),
        (_, true) => rng.random_range(0..3),
        (_, false) => [0, 2][rng.random_range(0..2)],
    };
    match op {
        0 => delete_char(s, rng.random_range(0..n)),
        1 => insert_char(s, rng.random_range(0..=n), domain.random_char(rng)),
        _ => modify_char(s, rng.random_range(0..n), domain.random_char(rng)),
    }
}

/// One edit of a shortest edit script from `s` to `target`, restricted to
/// characters and lengths of the domain. `None` when the strings are equal
/// or no admissible first edit exists.
pub fn step_toward<R: Rng>(s: &str, target: &str, domain: &Domain, rng: &mut R) -> Option<String> {
    let a: Vec<char> = s.chars().collect();
    let b: Vec<char> = target.chars().collect();
    let (n, m) = (a.len(), b.len());
    // d[i][j]: distance between a[i..] and b[j..].
    let mut d = vec![vec![0usize; m + 1]; n + 1];
    for i in (0..=n).rev() {
        for j in (0..=m).rev() {
            d[i][j] = if i == n {
                m - j
            } else if j == m {
                n - i
            } else {
                let sub = d[i + 1][j + 1] + usize::from(a[i] != b[j]);
                sub.min(d[i + 1][j] + 1).min(d[i][j + 1] + 1)
            };
        }
    }
    if d[0][0] == 0 {
        return None;
    }
    let allowed = |c: char| domain.alphabet.as_ref().is_none_or(|al| al.contains(&c));
    let (mut i, mut j) = (0, 0);
    loop {
        if i < n && j < m && a[i] == b[j] && d[i][j] == d[i + 1][j + 1] {
            i += 1;
            j += 1;
            continue;
        }
        let mut options = Vec::new();
        if i < n && j < m && d[i][j] == d[i + 1][j + 1] + 1 && allowed(b[j]) {
            options.push(modify_char(s, i, b[j]));
        }
        if i < n && d[i][j] == d[i + 1][j] + 1 {
            options.push(delete_char(s, i));
        }
        if j < m && d[i][j] == d[i][j + 1] + 1 && n < domain.max_str_len && allowed(b[j]) {
            options.push(insert_char(s, i, b[j]));
        }
        if options.is_empty() {
            return None;
        }
        let k = rng.random_range(0..options.len());
        return Some(options.swap_remove(k));
    }
}

/// Single-point crossover of two strings at per-string cut points: returns
/// `a[..ca] + b[cb..]` and `b[..cb] + a[ca..]`, each truncated to `max_len`.
pub fn crossover_strings(a: &str, b: &str, ca: usize, cb: usize, max_len: usize) -> (String, String) {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let (ca, cb) = (ca.min(a.len()), cb.min(b.len()));
    let x = a[..ca].iter().chain(&b[cb..]).take(max_len).collect();
    let y = b[..cb].iter().chain(&a[ca..]).take(max_len).collect();
    (x, y)
}

/// Draws `k` entrants uniformly (with replacement) and returns the index of
/// the fittest (lowest); ties go to the earliest population index.
pub fn tournament_select<F: PartialOrd, R: Rng>(fitness: &[F], k: usize, rng: &mut R) -> usize {
    assert!(!fitness.is_empty() && k >= 1, "tournament needs entrants");
    let mut best = rng.random_range(0..fitness.len());
    for _ in 1..k {
        let c = rng.random_range(0..fitness.len());
        if fitness[c] < fitness[best] || (fitness[c] == fitness[best] && c < best) {
            best = c;
        }
    }
    best
}
