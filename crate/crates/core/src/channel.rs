//! Radio channel abstraction: four path-loss models, the link budget
//! turning path loss into SINR, and a logistic SINR-to-BLER map.

use crate::error::Error;
use crate::phy::McsEntry;
use crate::sim::RngStream;

const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

/// Transmit-side link budget; doubles as the free-space model parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeSpaceParams {
    pub tx_power_dbm: f64,
    pub g_tx_dbi: f64,
    pub g_rx_dbi: f64,
    /// System-loss factor L >= 1 (dimensionless).
    pub system_loss: f64,
    pub freq_mhz: f64,
}

impl FreeSpaceParams {
    pub fn new(
        tx_power_dbm: f64,
        g_tx_dbi: f64,
        g_rx_dbi: f64,
        system_loss: f64,
        freq_mhz: f64,
    ) -> Result<Self, Error> {
        if !(system_loss >= 1.0) {
            return Err(Error::invalid(format!("system loss must be >= 1, got {system_loss}")));
        }
        if !(freq_mhz > 0.0) {
            return Err(Error::invalid(format!("frequency must be > 0 MHz, got {freq_mhz}")));
        }
        Ok(FreeSpaceParams { tx_power_dbm, g_tx_dbi, g_rx_dbi, system_loss, freq_mhz })
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT_M_S / (self.freq_mhz * 1e6)
    }
}

impl Default for FreeSpaceParams {
    // Typical macro-cell downlink budget at 2.5 GHz.
    fn default() -> Self {
        FreeSpaceParams {
            tx_power_dbm: 43.0,
            g_tx_dbi: 15.0,
            g_rx_dbi: -1.0,
            system_loss: 1.0,
            freq_mhz: 2500.0,
        }
    }
}

/// Suburban macro-cell model: `PL = H + 10*gamma*log10(d/d0) + X_f + X_h + s`
/// with log-normal shadowing `s ~ N(0, shadow_sigma)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErcegParams {
    /// Intercept at the reference distance, in dB.
    pub intercept_db: f64,
    pub d0_m: f64,
    pub gamma: f64,
    pub shadow_sigma_db: f64,
    pub x_f_db: f64,
    pub x_h_db: f64,
}

impl ErcegParams {
    pub fn new(
        intercept_db: f64,
        d0_m: f64,
        gamma: f64,
        shadow_sigma_db: f64,
        x_f_db: f64,
        x_h_db: f64,
    ) -> Result<Self, Error> {
        if !(d0_m > 0.0) {
            return Err(Error::invalid(format!("d0 must be > 0, got {d0_m}")));
        }
        if !(gamma > 0.0) {
            return Err(Error::invalid(format!("gamma must be > 0, got {gamma}")));
        }
        if !(shadow_sigma_db >= 0.0) {
            return Err(Error::invalid(format!("shadow sigma must be >= 0, got {shadow_sigma_db}")));
        }
        Ok(ErcegParams { intercept_db, d0_m, gamma, shadow_sigma_db, x_f_db, x_h_db })
    }

    /// Intercept from the free-space loss at `d0` for the given frequency,
    /// which is how the model's H is defined.
    pub fn for_frequency(
        freq_mhz: f64,
        gamma: f64,
        shadow_sigma_db: f64,
        x_f_db: f64,
        x_h_db: f64,
    ) -> Result<Self, Error> {
        let d0_m = 100.0;
        let budget = FreeSpaceParams::new(0.0, 0.0, 0.0, 1.0, freq_mhz)?;
        let intercept_db = free_space_path_loss(d0_m, &budget)?;
        Self::new(intercept_db, d0_m, gamma, shadow_sigma_db, x_f_db, x_h_db)
    }

    /// Hilly terrain with moderate-to-heavy tree density at 2.5 GHz.
    pub fn suburban_default() -> Self {
        Self::for_frequency(2500.0, 4.0, 8.0, 0.0, 0.0).expect("valid defaults")
    }
}

/// Sign selector for the vehicular model's `21*log10(f)` term. The
/// published form subtracts it, which makes loss fall with frequency;
/// the ITU-style positive sign is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreqTermSign {
    Plus,
    Minus,
}

impl FreqTermSign {
    fn factor(self) -> f64 {
        match self {
            FreqTermSign::Plus => 1.0,
            FreqTermSign::Minus => -1.0,
        }
    }
}

/// Vehicular macro-cell model parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicularParams {
    /// Base-station antenna height above rooftop, meters.
    pub bs_height_m: f64,
    pub freq_mhz: f64,
    pub freq_term_sign: FreqTermSign,
}

impl VehicularParams {
    pub fn new(bs_height_m: f64, freq_mhz: f64, freq_term_sign: FreqTermSign) -> Result<Self, Error> {
        // The 40(1 - 4e-3 * dhb) slope must stay positive.
        if !(bs_height_m > 0.0 && bs_height_m < 250.0) {
            return Err(Error::invalid(format!(
                "base-station antenna height must be in (0, 250) m, got {bs_height_m}"
            )));
        }
        if !(freq_mhz > 0.0) {
            return Err(Error::invalid(format!("frequency must be > 0 MHz, got {freq_mhz}")));
        }
        Ok(VehicularParams { bs_height_m, freq_mhz, freq_term_sign })
    }
}

impl Default for VehicularParams {
    fn default() -> Self {
        VehicularParams { bs_height_m: 15.0, freq_mhz: 2500.0, freq_term_sign: FreqTermSign::Plus }
    }
}

/// Receiver-side budget: thermal noise floor over the channel bandwidth
/// and the logistic steepness of the SINR-to-BLER map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub noise_floor_dbm: f64,
    /// Logistic slope in 1/dB; larger means a sharper error cliff.
    pub bler_slope: f64,
}

impl LinkBudget {
    pub fn new(noise_floor_dbm: f64, bler_slope: f64) -> Result<Self, Error> {
        if !(noise_floor_dbm < 0.0) {
            return Err(Error::invalid(format!("noise floor must be < 0 dBm, got {noise_floor_dbm}")));
        }
        if !(bler_slope > 0.0) {
            return Err(Error::invalid(format!("bler slope must be > 0, got {bler_slope}")));
        }
        Ok(LinkBudget { noise_floor_dbm, bler_slope })
    }
}

impl Default for LinkBudget {
    // -174 dBm/Hz + 10*log10(5 MHz) + 7 dB noise figure.
    fn default() -> Self {
        LinkBudget { noise_floor_dbm: noise_floor_dbm(5e6, 7.0), bler_slope: 2.0 }
    }
}

/// Thermal noise floor in dBm for the given bandwidth and noise figure.
pub fn noise_floor_dbm(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    -174.0 + 10.0 * bandwidth_hz.log10() + noise_figure_db
}

/// Friis free-space loss, `20*log10(4*pi*d/lambda) + 10*log10(L)`.
///
/// Note: the usual textbook statement of this model omits the wavelength
/// when abbreviated; the dimensionally consistent Friis form is used here.
pub fn free_space_path_loss(distance_m: f64, p: &FreeSpaceParams) -> Result<f64, Error> {
    if !(distance_m > 0.0) {
        return Err(Error::invalid(format!(
            "free-space loss undefined at distance {distance_m} m"
        )));
    }
    let lambda = p.wavelength_m();
    Ok(20.0 * (4.0 * std::f64::consts::PI * distance_m / lambda).log10()
        + 10.0 * p.system_loss.log10())
}

/// Deterministic part of the suburban model (shadowing term zero).
/// Distances below `d0` clamp to `d0`.
pub fn erceg_mean_path_loss(distance_m: f64, p: &ErcegParams) -> f64 {
    let d = distance_m.max(p.d0_m);
    p.intercept_db + 10.0 * p.gamma * (d / p.d0_m).log10() + p.x_f_db + p.x_h_db
}

/// Suburban loss with one shadowing draw from the named stream.
pub fn erceg_path_loss(distance_m: f64, p: &ErcegParams, shadow: &mut RngStream) -> f64 {
    erceg_mean_path_loss(distance_m, p) + shadow.normal(0.0, p.shadow_sigma_db)
}

/// Outdoor-to-indoor / pedestrian loss, `40*log10(R) + 30*log10(f) + 49`
/// with R in kilometers and f in MHz.
pub fn pedestrian_path_loss(r_km: f64, freq_mhz: f64) -> f64 {
    40.0 * r_km.log10() + 30.0 * freq_mhz.log10() + 49.0
}

/// Vehicular loss,
/// `40*(1 - 4e-3*dhb)*log10(R) - 18*log10(dhb) +- 21*log10(f) + 80`
/// with R in kilometers, f in MHz, dhb in meters.
pub fn vehicular_path_loss(r_km: f64, p: &VehicularParams) -> f64 {
    40.0 * (1.0 - 4e-3 * p.bs_height_m) * r_km.log10() - 18.0 * p.bs_height_m.log10()
        + p.freq_term_sign.factor() * 21.0 * p.freq_mhz.log10()
        + 80.0
}

/// SINR in dB for a single-serving-BS link (no interference term):
/// `tx_power + g_tx + g_rx - path_loss - noise_floor`.
pub fn sinr(budget: &FreeSpaceParams, path_loss_db: f64, lb: &LinkBudget) -> f64 {
    budget.tx_power_dbm + budget.g_tx_dbi + budget.g_rx_dbi - path_loss_db - lb.noise_floor_dbm
}

/// Block-error probability at the given SINR for the given MCS:
/// a logistic centered on the MCS's minimum SINR.
pub fn bler(sinr_db: f64, mcs: &McsEntry, lb: &LinkBudget) -> f64 {
    1.0 / (1.0 + (lb.bler_slope * (sinr_db - mcs.min_sinr_db)).exp())
}

/// Tagged union over the four propagation environments. The free-space
/// and pedestrian variants read `L` and `f` from the scenario budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathLossModel {
    FreeSpace,
    Erceg(ErcegParams),
    Pedestrian,
    Vehicular(VehicularParams),
}

pub const PATH_LOSS_NAMES: [&str; 4] = ["freespace", "erceg", "pedestrian", "vehicular"];

impl PathLossModel {
    pub fn name(&self) -> &'static str {
        match self {
            PathLossModel::FreeSpace => "freespace",
            PathLossModel::Erceg(_) => "erceg",
            PathLossModel::Pedestrian => "pedestrian",
            PathLossModel::Vehicular(_) => "vehicular",
        }
    }

    /// Deterministic loss (shadowing disabled), used for cell selection.
    pub fn mean_path_loss(&self, distance_m: f64, budget: &FreeSpaceParams) -> Result<f64, Error> {
        match self {
            PathLossModel::FreeSpace => free_space_path_loss(distance_m, budget),
            PathLossModel::Erceg(p) => Ok(erceg_mean_path_loss(distance_m, p)),
            PathLossModel::Pedestrian => {
                if !(distance_m > 0.0) {
                    return Err(Error::invalid("pedestrian loss undefined at distance 0"));
                }
                Ok(pedestrian_path_loss(distance_m / 1000.0, budget.freq_mhz))
            }
            PathLossModel::Vehicular(p) => {
                if !(distance_m > 0.0) {
                    return Err(Error::invalid("vehicular loss undefined at distance 0"));
                }
                Ok(vehicular_path_loss(distance_m / 1000.0, p))
            }
        }
    }

    /// Loss including a shadowing draw where the model has one.
    pub fn path_loss(
        &self,
        distance_m: f64,
        budget: &FreeSpaceParams,
        shadow: &mut RngStream,
    ) -> Result<f64, Error> {
        match self {
            PathLossModel::Erceg(p) => Ok(erceg_path_loss(distance_m, p, shadow)),
            _ => self.mean_path_loss(distance_m, budget),
        }
    }
}
