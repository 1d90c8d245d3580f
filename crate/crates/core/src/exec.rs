//! Order-preserving map helpers that run on rayon when the `parallel` feature is on
//! and fall back to plain iterators otherwise. Results never depend on the thread count:
//! every item is computed independently and collected in input order.

macro_rules! if_rayon {
    ($rayon_value:expr, $else_value:expr) => {{
        #[cfg(feature = "parallel")]
        {
            $rayon_value
        }
        #[cfg(not(feature = "parallel"))]
        {
            $else_value
        }
    }};
}

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub(crate) fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    if_rayon!(
        (0..n).into_par_iter().map(f).collect(),
        (0..n).map(f).collect()
    )
}

pub(crate) fn try_map_slice<T, R, E, F>(items: &[T], f: F) -> Result<Vec<R>, E>
where
    T: Sync,
    R: Send,
    E: Send,
    F: Fn(&T) -> Result<R, E> + Sync + Send,
{
    if_rayon!(items.par_iter().map(f).collect(), items.iter().map(f).collect())
}
