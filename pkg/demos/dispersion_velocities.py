# %% [markdown]
# # Kramers-Kronig and group velocity in a Lorentz medium
#
# Re chi is rebuilt from Im chi alone. Near the absorption line the slope of
# n(omega) turns negative and the group velocity leaves [0, 1].

# %%
import numpy as np

from tunneltime import dispersion as dsp

params = dsp.LorentzParams(omega_p=0.5, omega_0=1.0, gamma=0.05)

# %% Reconstruction error under grid refinement
for count in (4096, 8192, 16384):
    s = dsp.lorentz_samples(params, count=count)
    w = s.omega[:-1]
    keep = np.abs(w - 1.0) > 0.1
    rec = dsp.kk_real_from_imag(s, w[keep])
    print(count, np.max(np.abs(rec / s.chi.real[:-1][keep] - 1)))

# %% Where the group velocity is anomalous
prof = dsp.refractive_profile(dsp.lorentz_samples(params))
odd = (prof.v_group > 1) | (prof.v_group < 0)
print("anomalous band:", prof.omega[odd].min(), "to", prof.omega[odd].max())
print("v_group range:", np.nanmin(prof.v_group), np.nanmax(prof.v_group))
