//! Pairwise (tree) reductions.
//!
//! The split points depend only on the slice length, so the result is
//! bit-identical whether the two halves run on one thread or two.

const LEAF: usize = 32;
const PAR_CUTOFF: usize = 1 << 14;

/// Pairwise sum of a slice.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    pairwise_map_sum(xs, |x| x)
}

/// Pairwise sum of `f(x)` over a slice.
pub fn pairwise_map_sum<F>(xs: &[f64], f: F) -> f64
where
    F: Fn(f64) -> f64 + Sync,
{
    tree(xs, &f)
}

/// Pairwise sum of `f(x, y)` over two slices of equal length.
pub fn pairwise_zip_sum<F>(xs: &[f64], ys: &[f64], f: F) -> f64
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    assert_eq!(xs.len(), ys.len());
    tree2(xs, ys, &f)
}

fn tree<F: Fn(f64) -> f64 + Sync>(xs: &[f64], f: &F) -> f64 {
    if xs.len() <= LEAF {
        return xs.iter().fold(0.0, |acc, &x| acc + f(x));
    }
    let mid = xs.len() / 2;
    let (l, r) = xs.split_at(mid);
    if xs.len() >= PAR_CUTOFF {
        let (a, b) = rayon::join(|| tree(l, f), || tree(r, f));
        a + b
    } else {
        tree(l, f) + tree(r, f)
    }
}

fn tree2<F: Fn(f64, f64) -> f64 + Sync>(xs: &[f64], ys: &[f64], f: &F) -> f64 {
    if xs.len() <= LEAF {
        return xs.iter().zip(ys).fold(0.0, |acc, (&x, &y)| acc + f(x, y));
    }
    let mid = xs.len() / 2;
    let (xl, xr) = xs.split_at(mid);
    let (yl, yr) = ys.split_at(mid);
    if xs.len() >= PAR_CUTOFF {
        let (a, b) = rayon::join(|| tree2(xl, yl, f), || tree2(xr, yr, f));
        a + b
    } else {
        tree2(xl, yl, f) + tree2(xr, yr, f)
    }
}
