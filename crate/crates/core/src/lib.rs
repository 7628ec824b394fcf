//! Exact verification of exceptional collections of line bundles on the
//! toric varieties `V_n`.

pub mod cohomology;
pub mod collection;
pub mod exact;
pub mod fan;
pub mod forbidden;
pub mod par;
pub mod picard;
pub mod windows;
