//! Signal recovery: filtering, averaging, matched filtering, SNR and
//! sensitivity estimation.

pub mod averaging;
pub mod comb;
pub mod sensitivity;
pub mod snr;
pub mod spectral;
pub mod template;

pub use averaging::{align_and_average, align_to, average, trigger_index, Averaged, Extremum};
pub use comb::{comb_filter, CombFilter};
pub use sensitivity::{
    sensitivity_method1, sensitivity_method2, sensitivity_method3, SensitivityReport,
    TheoreticalBudget,
};
pub use snr::{snr, SnrReport, DETECTION_THRESHOLD};
pub use template::{build_template, matched_filter, MatchedTemplate, DEFAULT_TEMPLATE_WINDOW};
