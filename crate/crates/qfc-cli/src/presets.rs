//! Shipped study presets, emitted as editable TOML configs.

use std::path::{Path, PathBuf};

use crate::{AppError, AppResult};

pub const PRESET_NAMES: [&str; 6] = ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7"];

const FIG2: &str = r#"# Relative output flux of the converted photon vs the nonlinear interaction
# strength, for Stokes/anti-Stokes detunings and the electronic-only
# reference, under CW pumps (filter-to-input-flux ratio fixed at 1).
schema_version = 1
mode = "study"
study = "fig2"
data_dir = "data"

[fiber]
gamma = 1e-3
f_r = 0.18
pump_power = 1.0
length = 500.0
temperature = 300.0
detuning_thz = 17.0
polarization = "copolarized"

[grid]
n = 256
dt = 0.02

[filter]
width = 20.0

[detector]
window = 10.0

[output]
directory = "out/fig2"
"#;

const FIG3: &str = r#"# Time-resolved second-order correlation map g2(t1,t2) of a 0.1 ps photon
# converted at the optimal length under CW pumps, Stokes side, room
# temperature.
schema_version = 1
mode = "study"
study = "fig3"
data_dir = "data"

[fiber]
gamma = 1e-3
f_r = 0.18
pump_power = 1.0
length = 1.0          # replaced by the conversion-optimal length
temperature = 300.0
detuning_thz = -17.0
polarization = "copolarized"

[grid]
n = 2048
dt = 0.005

[input]
kind = "gaussian"
tau_p = 0.1
center = 0.0

[filter]
width = 20.0

[detector]
window = 10.0

[numerics]
z_nodes = 65

[output]
directory = "out/fig3"
"#;

const FIG4: &str = r#"# Windowed g2 of the converted photon under CW pumps: (a) vs interaction
# strength at fixed pump power for both polarization configurations and both
# detuning signs; (b) vs detuning at the optimal length for three fiber
# temperatures, with the far-detuned closed-form estimate.
schema_version = 1
mode = "study"
study = "fig4"
data_dir = "data"

[fiber]
gamma = 1e-3
f_r = 0.18
pump_power = 1.0
length = 1.0
temperature = 300.0
detuning_thz = 17.0
polarization = "copolarized"

[grid]
n = 1024
dt = 0.01

[input]
kind = "gaussian"
tau_p = 0.1
center = 0.0

[filter]
width = 20.0

[detector]
window = 10.0

[numerics]
z_nodes = 65

[output]
directory = "out/fig4"
"#;

const FIG5: &str = r#"# Cross Green function maps |G_is(t,t')| for the pump-collision scenario at
# interaction strength 4*pi: electronic response, added second-order
# dispersion, silica Raman fraction, and pure delayed response.
schema_version = 1
mode = "study"
study = "fig5"
data_dir = "data"

[fiber]
gamma = 1e-2
f_r = 0.18
pump_power = 3493.2
temperature = 300.0
detuning_thz = -17.0
polarization = "copolarized"
beta2_s = 0.01        # applied as +/- on the two flavor pairs in panel b

[grid]
n = 1024
dt = 0.005

[pumps]
tau_p = 0.1
collision_geometry = true
delta_n_eff = 1e-3

[filter]
width = 20.0

[detector]
window = 10.0

[numerics]
steps = 320

[output]
directory = "out/fig5"
"#;

const FIG6: &str = r#"# First two Schmidt coefficients of the cross Green function vs interaction
# strength for three Raman fractions (0, 0.18, 1), varying the pump peak
# power in the collision scenario; leading input modes exported at 4*pi.
schema_version = 1
mode = "study"
study = "fig6"
data_dir = "data"

[fiber]
gamma = 1e-2
f_r = 0.18
pump_power = 1000.0
temperature = 300.0
detuning_thz = -17.0
polarization = "copolarized"

[grid]
n = 512
dt = 0.01

[pumps]
tau_p = 0.1
collision_geometry = true
delta_n_eff = 1e-3

[filter]
width = 20.0

[detector]
window = 10.0

[output]
directory = "out/fig6"
"#;

const FIG7: &str = r#"# Windowed g2 and conversion probability vs detuning for four input-photon
# choices (pump-matched Gaussian, electronic-optimized Schmidt mode,
# Raman-optimized Schmidt mode, filter-optimized Schmidt mode) against the
# CW-pump reference, at interaction strength 4*pi and room temperature.
schema_version = 1
mode = "study"
study = "fig7"
data_dir = "data"

[fiber]
gamma = 1e-2
f_r = 0.18
pump_power = 3493.2
temperature = 300.0
detuning_thz = 17.0
polarization = "copolarized"

[grid]
n = 512
dt = 0.01

[pumps]
tau_p = 0.1
collision_geometry = true
delta_n_eff = 1e-3

[input]
kind = "gaussian"
tau_p = 0.1

[filter]
width = 20.0

[detector]
window = 10.0

[numerics]
steps = 256
suffix_nodes = 17

[output]
directory = "out/fig7"
"#;

pub fn preset_text(name: &str) -> AppResult<&'static str> {
    match name {
        "fig2" => Ok(FIG2),
        "fig3" => Ok(FIG3),
        "fig4" => Ok(FIG4),
        "fig5" => Ok(FIG5),
        "fig6" => Ok(FIG6),
        "fig7" => Ok(FIG7),
        other => Err(AppError::Config(format!(
            "unknown preset {other:?}; available: {}",
            PRESET_NAMES.join(", ")
        ))),
    }
}

pub fn emit(name: &str, dir: &Path) -> AppResult<PathBuf> {
    let text = preset_text(name)?;
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{name}.toml"));
    std::fs::write(&path, text)?;
    Ok(path)
}
