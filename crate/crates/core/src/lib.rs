//! Deliberation via matching: exact protocol simulation, worst-case distortion
//! oracles, certificate checking and lower-bound families.

pub mod bounds;
pub mod certify;
pub mod exactnum;
pub mod instances;
pub mod io;
pub mod lpsolve;
pub mod montecarlo;
pub mod oracle;
pub mod protocol;

/// Maps over a slice, in parallel when the `parallel` feature is on.
pub(crate) fn par_map<I, O, F>(items: &[I], f: F) -> Vec<O>
where
    I: Sync,
    O: Send,
    F: Fn(&I) -> O + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}
