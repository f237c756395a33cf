//! Data-parallel loops over cells and independent runs.
//!
//! With the `parallel` feature the loops run on the rayon thread pool when
//! [`Parallelism::Parallel`] is selected; otherwise, and always without the
//! feature, they run sequentially on the calling thread.

use crate::error::Result;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Parallelism {
    #[default]
    Parallel,
    Sequential,
}

impl Parallelism {
    /// Whether the crate was built with the rayon backend.
    pub const fn available() -> bool {
        cfg!(feature = "parallel")
    }

    fn use_rayon(self) -> bool {
        Self::available() && self == Parallelism::Parallel
    }
}

/// Minimum number of cells handed to one rayon task.
#[cfg(feature = "parallel")]
const MIN_CHUNK: usize = 32;

/// Calls `f(state, i, &mut out[i])` for every `i`, with one `init()` state
/// per worker. Stops at the first error.
pub(crate) fn try_fill<T, S, I, F>(out: &mut [T], mode: Parallelism, init: I, f: F) -> Result<()>
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize, &mut T) -> Result<()> + Sync + Send,
{
    if mode.use_rayon() {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            return out
                .par_iter_mut()
                .enumerate()
                .with_min_len(MIN_CHUNK)
                .try_for_each_init(init, |s, (i, t)| f(s, i, t));
        }
    }
    let mut state = init();
    for (i, t) in out.iter_mut().enumerate() {
        f(&mut state, i, t)?;
    }
    Ok(())
}

/// `items.map(f)` preserving order; used for independent runs of a study.
pub fn map<T, R, F>(items: &[T], mode: Parallelism, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if mode.use_rayon() {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
    }
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn modes_agree() {
        for mode in [Parallelism::Parallel, Parallelism::Sequential] {
            let mut out = vec![0usize; 1000];
            try_fill(&mut out, mode, || 3usize, |s, i, t| {
                *t = i * *s;
                Ok(())
            })
            .unwrap();
            assert!(out.iter().enumerate().all(|(i, &v)| v == 3 * i));
            assert_eq!(map(&[1, 2, 3], mode, |x| x * 2), vec![2, 4, 6]);
        }
    }

    #[test]
    fn errors_propagate() {
        let mut out = vec![0.0; 500];
        let r = try_fill(&mut out, Parallelism::Parallel, || (), |_, i, _| {
            if i == 321 {
                Err(Error::InvalidState("bad".into()))
            } else {
                Ok(())
            }
        });
        assert!(r.is_err());
    }
}
