//! Executable forms of the sumset inequalities and of Petridis selection.

mod checks;
mod petridis;
mod quotient;
mod report;

pub use checks::{
    check_cauchy_davenport, check_nb_bound, check_plunnecke, check_plunnecke_normalized,
    check_ruzsa_triangle, is_prime,
};
pub use petridis::{
    petridis_select, petridis_select_with, PetridisCertificate, PetridisMode, PetridisOptions,
    PowerCheck,
};
pub use quotient::{
    check_quotient_lemma, quotient_demo, quotient_map, quotient_subchecks, MeasureCheck,
    QuotientCheck, QuotientDemoReport, QuotientMap,
};
pub use report::{describe, InequalityId, Status, VerificationReport};
