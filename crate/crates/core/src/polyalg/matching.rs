use num_complex::Complex64;

/// Assignment `perm` minimising `Σ |a[i] − b[perm[i]]|`.
///
/// Exhaustive over permutations up to eight points (the root sets handled
/// here have at most four); larger sets fall back to greedy nearest
/// neighbour. Ties keep the first permutation found in Heap order, which
/// starts from the identity.
pub fn min_displacement_assignment(a: &[Complex64], b: &[Complex64]) -> Vec<usize> {
    let n = a.len().min(b.len());
    if n == 0 {
        return Vec::new();
    }
    if n > 8 || a.len() != b.len() {
        return greedy(a, b);
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = perm.clone();
    let mut best_cost = total_displacement(a, b, &perm);
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            let cost = total_displacement(a, b, &perm);
            if cost < best_cost {
                best_cost = cost;
                best.clone_from(&perm);
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

/// Pairing between sets of possibly different sizes: every point of the
/// smaller set is matched to a distinct point of the larger one with minimal
/// total displacement. Entry `i` is the partner of `a[i]`, if any.
pub fn partial_assignment(a: &[Complex64], b: &[Complex64]) -> Vec<Option<usize>> {
    if a.len() <= b.len() {
        let mut best = (f64::INFINITY, Vec::new());
        let mut used = vec![false; b.len()];
        let mut cur = Vec::with_capacity(a.len());
        if b.len() > 8 {
            return greedy(a, b).into_iter().map(Some).collect();
        }
        search(a, b, &mut used, &mut cur, 0.0, &mut best);
        best.1.into_iter().map(Some).collect()
    } else {
        let back = partial_assignment(b, a);
        let mut out = vec![None; a.len()];
        for (j, i) in back.into_iter().enumerate() {
            if let Some(i) = i {
                out[i] = Some(j);
            }
        }
        out
    }
}

fn search(a: &[Complex64], b: &[Complex64], used: &mut [bool], cur: &mut Vec<usize>, cost: f64, best: &mut (f64, Vec<usize>)) {
    if cost >= best.0 {
        return;
    }
    let i = cur.len();
    if i == a.len() {
        *best = (cost, cur.clone());
        return;
    }
    for j in 0..b.len() {
        if !used[j] {
            used[j] = true;
            cur.push(j);
            search(a, b, used, cur, cost + (a[i] - b[j]).norm(), best);
            cur.pop();
            used[j] = false;
        }
    }
}

pub fn total_displacement(a: &[Complex64], b: &[Complex64], perm: &[usize]) -> f64 {
    a.iter().zip(perm).map(|(x, &j)| (x - b[j]).norm()).sum()
}

fn greedy(a: &[Complex64], b: &[Complex64]) -> Vec<usize> {
    let mut taken = vec![false; b.len()];
    a.iter()
        .take(b.len())
        .map(|x| {
            let j = (0..b.len())
                .filter(|&j| !taken[j])
                .min_by(|&p, &q| (x - b[p]).norm().total_cmp(&(x - b[q]).norm()))
                .expect("free slot");
            taken[j] = true;
            j
        })
        .collect()
}
