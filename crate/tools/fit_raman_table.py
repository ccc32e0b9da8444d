#!/usr/bin/env python3
"""Fit an 11-oscillator damped-sine model of the fused-silica Raman response.

Reference curve: a multi-vibrational-mode composition of the known silica
Raman bands (boson peak, 231/363/440-463 cm^-1 main complex, D1/D2 defect
lines, 800/1080/1215 cm^-1 bands). Band widths and the main-band weight are
calibrated against two measured anchors of bulk fused silica:
  * main gain peak at 13.2 THz (440 cm^-1);
  * peak-to-DC ratio Im{h(nu_pk)} / h(0) ~= 1.6, which reproduces the
    measured peak Raman gain ~6e-14 m/W at 1.55 um for f_R = 0.18 under the
    normalization int h(t) dt = 1.

We fit h(t) = sum_i F_i d_i sin(w_i t) exp(-d_i t) (t >= 0) to the reference
spectrum and emit data/raman_silica.csv with columns F,omega_THz,d_THz where
w_i = 2*pi*omega_THz and d_i = 2*pi*d_THz (rad/ps).

The orthogonal (anisotropic) table raman_silica_hb.csv holds the same rows
scaled by per-band depolarization factors; the strongly polarized main band
keeps h_b/h_par ~ 0.2 so the crosspolarized response (h_b/2) is ~10x weaker
than the parallel response at the gain peak.
"""
import numpy as np
from scipy.optimize import least_squares

C_CM_PS = 0.0299792458  # speed of light, cm/ps

# position [cm^-1], intensity, Gaussian FWHM [cm^-1], Lorentzian FWHM [cm^-1]
BASE_MODES = [
    (56.25, 1.00, 52.10, 17.37),
    (100.00, 11.40, 110.42, 38.81),
    (231.25, 36.67, 175.00, 58.33),
    (362.50, 67.67, 162.50, 54.17),
    (443.00, 74.00, 135.33, 45.11),   # main band, position pinned by the measured peak
    (497.00, 4.50, 24.50, 8.17),
    (611.50, 4.60, 41.50, 13.83),
    (691.67, 4.20, 155.00, 51.67),
    (793.67, 4.50, 59.50, 19.83),
    (835.50, 2.70, 64.30, 21.43),
    (930.00, 3.00, 150.00, 50.00),
    (1080.00, 3.00, 91.00, 30.33),
    (1215.00, 3.00, 160.00, 53.33),
]

DT = 0.001
NFFT = 1 << 16
t = np.arange(NFFT) * DT
nu_fft = np.fft.rfftfreq(NFFT, DT)  # THz

def mode_spectra(shrink):
    spectra = []
    for pos, amp, gfwhm, lfwhm in BASE_MODES:
        wv = 2 * np.pi * C_CM_PS * pos
        gamma = np.pi * C_CM_PS * lfwhm * shrink
        Gamma = np.pi * C_CM_PS * gfwhm * shrink
        h = (amp / wv) * np.exp(-gamma * t - Gamma**2 * t**2 / 4.0) * np.sin(wv * t)
        # int h exp(+i 2 pi nu t) dt  = conj(rfft) * dt
        spectra.append(np.conj(np.fft.rfft(h)) * DT)
    return np.array(spectra)

band = (nu_fft > 1.0) & (nu_fft < 20.0)
best = None
for shrink in np.linspace(0.30, 0.95, 27):
    sp = mode_spectra(shrink)
    for boost in np.linspace(0.8, 2.6, 37):
        w = np.ones(len(BASE_MODES)); w[4] = boost
        tot = w @ sp
        dc = tot[0].real
        im = tot.imag / dc
        i = np.argmax(im[band])
        nu_pk = nu_fft[band][i]; im_pk = im[band][i]
        cost = ((nu_pk - 13.2) / 0.1)**2 + ((im_pk - 1.60) / 0.04)**2
        if best is None or cost < best[0]:
            best = (cost, shrink, boost, nu_pk, im_pk)
cost, shrink, boost, pk_nu, pk_im = best
print(f"calibrated shrink={shrink:.3f} boost={boost:.3f}: peak {pk_nu:.3f} THz, Im {pk_im:.4f}")
assert 13.0 < pk_nu < 13.4 and 1.5 < pk_im < 1.7

sp = mode_spectra(shrink)
w = np.ones(len(BASE_MODES)); w[4] = boost
ref_full = (w @ sp)
ref_full /= ref_full[0].real  # normalize int h dt = 1

nu_grid = np.linspace(0.05, 48.0, 1200)
ref_spec = np.interp(nu_grid, nu_fft, ref_full.real) + 1j*np.interp(nu_grid, nu_fft, ref_full.imag)

def osc_spectrum(params, nus_thz):
    F = params[0::3]; wo = 2*np.pi*params[1::3]; d = 2*np.pi*params[2::3]
    nus = 2*np.pi*nus_thz
    s = np.zeros(len(nus_thz), dtype=complex)
    for Fi, wi, di in zip(F, wo, d):
        s += Fi * di * wi / ((di - 1j*nus)**2 + wi**2)
    return s

def osc_integral(params):
    F = params[0::3]; wo = 2*np.pi*params[1::3]; d = 2*np.pi*params[2::3]
    return np.sum(F * d * wo / (wo**2 + d**2))

start = []
keep = [0, 1, 2, 3, 4, 5, 6, 8, 9, 11, 12]
for k in keep:
    pos, amp, gfwhm, lfwhm = BASE_MODES[k]
    nu0 = C_CM_PS * pos
    d0 = C_CM_PS * (lfwhm + gfwhm/2) * shrink / 2.0
    start += [amp / 3000.0, nu0, d0]
start = np.array(start)

def resid(p):
    s = osc_spectrum(p, nu_grid)
    return np.concatenate([(s.imag - ref_spec.imag), 0.6*(s.real - ref_spec.real)])

lo = np.tile([-5.0, 0.3, 0.35], 11)
hi = np.tile([5.0, 46.0, 14.0], 11)
fit = least_squares(resid, np.clip(start, lo, hi), bounds=(lo, hi), xtol=1e-14, ftol=1e-14, max_nfev=60000)
p = fit.x
s_fit = osc_spectrum(p, nu_grid)
rel = np.linalg.norm(s_fit - ref_spec) / np.linalg.norm(ref_spec)
ipk = np.argmax(s_fit.imag)
print(f"fit: rel L2 err {rel:.4f}, Im peak at {nu_grid[ipk]:.3f} THz value {s_fit.imag[ipk]:.4f}")
assert rel < 0.08 and 12.9 < nu_grid[ipk] < 13.5

p[0::3] /= osc_integral(p)
print(f"post-normalization integral: {osc_integral(p):.12f}")

rows = sorted(zip(p[1::3], p[0::3], p[2::3]))
with open("/root/crate/data/raman_silica.csv", "w") as f:
    f.write("F,omega_THz,d_THz\n")
    for nu, F, d in rows:
        f.write(f"{F:.9g},{nu:.9g},{d:.9g}\n")

def depol(nu):
    if nu < 4.0:
        return 0.55
    if nu < 16.0:
        return 0.20
    if nu < 22.0:
        return 0.28
    return 0.35

hb_rows = [(nu, F * depol(nu), d) for nu, F, d in rows]
with open("/root/crate/data/raman_silica_hb.csv", "w") as f:
    f.write("F,omega_THz,d_THz\n")
    for nu, F, d in hb_rows:
        f.write(f"{F:.9g},{nu:.9g},{d:.9g}\n")

def table_spec(rows, nus_thz):
    q = np.zeros(len(nus_thz), dtype=complex)
    for nu, F, d in rows:
        wi = 2*np.pi*nu; di = 2*np.pi*d
        q += F * di * wi / ((di - 1j*2*np.pi*nus_thz)**2 + wi**2)
    return q

par = table_spec(rows, nu_grid)
orth = 0.5 * table_spec(hb_rows, nu_grid)
j = np.argmax(par.imag)
ratio = par.imag[j] / orth.imag[j]
print(f"shipped: Im h_par peak {par.imag[j]:.4f} at {nu_grid[j]:.3f} THz; parallel/orthogonal ratio at peak {ratio:.2f}")
laurent = sum(F * (2*np.pi*nu) * (2*np.pi*d)**2 for nu, F, d in rows)
print(f"laurent sum F*w*d^2 = {laurent:.6f} (rad/ps)^3")
assert 5.0 < ratio < 20.0
