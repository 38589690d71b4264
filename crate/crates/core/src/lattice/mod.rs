//! Ground-truth computations of the partition function: configuration
//! enumeration, vertex-picture contraction and the face-picture operator
//! product.

mod boundary;
mod contraction;
mod enumeration;
mod face_form;
mod monodromy;
mod operator;

pub use boundary::{boundary_states, BoundaryStateSet};
pub use contraction::{contract_lattice, partition_contraction, LatticeSpec, MAX_CONTRACTION_N};
pub use enumeration::{enumerate_lattice, partition_enumeration, MAX_ENUMERATION_N};
pub(crate) use face_form::face_monodromy_matrices;
pub use face_form::{
    face_creation_operator, face_creation_operator_at, one_row_face_monodromy, partition_face_form, FaceMonodromy,
    MAX_FACE_FORM_N,
};
pub use monodromy::{
    apply_double_row, check_exchange_relation, double_row_monodromy, double_row_monodromy_at, DoubleRowMonodromy,
    MAX_EXCHANGE_N,
};
pub use operator::{MultiSiteOperator, SiteLabel};
