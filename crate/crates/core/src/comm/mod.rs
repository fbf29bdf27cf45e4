//! Communication phase: LoS UCA channel, OAM mode multiplexing with
//! sensing-steered weights, detection and spectral efficiency.

mod beam;
mod channel;
mod link;

pub use beam::{
    beam_weights, dft_rx, dft_tx, diagonal_approx, diagonal_direct, diagonal_series, effective_channel, leakage_ratio,
    rx_combiner, tau, tx_precoder, BeamWeights, Pointing,
};
pub use channel::{approx_distance, exact_distance, is_near_field, los_channel, moving_range, ChannelModel};
pub use link::{
    boresight, detect, detection_matrix, link_noise_variance, link_report, mode_sinr, to_db, LinkOptions, LinkReport,
    SinrEntry, SINR_FLOOR_DB,
};
