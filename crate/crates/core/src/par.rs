//! Data-parallel helpers that fall back to sequential loops without the
//! `parallel` feature (e.g. in the wasm build).

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub fn map_range<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

pub fn map_slice<S: Sync, T: Send>(items: &[S], f: impl Fn(&S) -> T + Sync + Send) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

pub fn sum_range(n: usize, f: impl Fn(usize) -> f64 + Sync + Send) -> f64 {
    #[cfg(feature = "parallel")]
    {
        // fixed chunking keeps the summation order (and the result) deterministic
        let chunk = 4096;
        let parts: Vec<f64> = (0..n.div_ceil(chunk))
            .into_par_iter()
            .map(|c| ((c * chunk)..((c + 1) * chunk).min(n)).map(&f).sum())
            .collect();
        parts.iter().sum()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).sum()
    }
}

pub fn max_range(n: usize, f: impl Fn(usize) -> f64 + Sync + Send) -> f64 {
    map_range(n, f).into_iter().fold(0.0, f64::max)
}
