//! Inviscid-limit functionals, inequality certificates and pairings.

mod certificates;
mod functionals;
mod pairing;
mod table;

pub use certificates::{
    calibrate_sweep, higher_order_certificate, kolmogorov_equivalence_report, rate_certificate,
    rate_certificate_from_samples, RateSample,
    short_time_certificate, Certificate, KolmogorovReport, RateCertificate, RateRow, ShortTimeCertificate,
    ShortTimeRow, CONSTANT_FREE_TOL, DRIFT_FACTOR, EPS_SCAN, HIGHER_ORDER_TOL,
};
pub use functionals::{
    analyze_snapshot, dissipation_total, lambda_con, modulus_of_compactness, omega_con, omega_hat_field, q_con,
    structure_function_s2, trapezoid, trapezoid_window, FunctionalSeries, SnapshotFunctionals, UReference,
    MIN_WINDOW_SNAPSHOTS,
};
pub use pairing::{atom_mass, pair, separable_pairing, weak_star_pairing, AtomProfile, PairingRecord};
pub use table::{
    read_certificate_cells, CertificateCell, DiagnosticTable, TableRow, CONSTANT_FREE_CERTIFICATES,
};
