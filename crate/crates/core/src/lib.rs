//! Exact and numerical machinery for counting cubic fields through binary
//! cubic forms, with the 3-torsion, exponential-sum and Heegner-point
//! companions of those counts.

pub mod arith;
pub mod asymptotics;
pub mod census;
pub mod classgroups;
pub mod enumeration;
pub mod error;
pub mod forms;
pub mod golden;
pub mod hough;
pub mod maximality;
pub mod sign;

pub use enumeration::{enumerate_all_orbits, enumerate_orbits, FieldStream, Scope};
pub use error::{Error, Result};
pub use forms::{
    apply, canonicalize, discriminant, hessian, is_irreducible, ring_table, stabilizer_order,
    BinaryCubicForm, CubicRingTable, OrbitRecord, UnimodularMap,
};
pub use sign::Sign;
