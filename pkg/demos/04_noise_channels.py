# coding: utf-8

# # Noise models
#
# Pauli rates from relaxation and dephasing times, and the damping channels
# those times describe.

# In[1]:

import math

import numpy as np

from dqec import channels, qcore
from dqec.channels import DecoherenceTimes

times = DecoherenceTimes(t=20e-6, T1=100e-6, T2=80e-6)
channels.rates_from_times(times)


# Amplitude damping with omega = 1 - exp(-t/T1) followed by phase damping
# with the scattering probability leaves the coherence at exp(-t/T2).

# In[2]:

plus = qcore.to_mixed(qcore.prepare(1 / math.sqrt(2), 1 / math.sqrt(2), "q"))
rho = channels.amplitude_damping(plus, "q", channels.damping_probability(times))
rho = channels.phase_damping(rho, "q", channels.scattering_probability(times))
print(abs(rho.matrix[0, 1]), 0.5 * math.exp(-times.t / times.T2))


# Once T2 exceeds 2*T1 the formulas leave the physical range, and the
# library reports that instead of clamping.

# In[3]:

bad = DecoherenceTimes(t=1.0, T1=1.0, T2=5.0)
print("scattering probability:", channels.scattering_probability(bad))
try:
    channels.rates_from_times(bad)
except channels.NegativeRate as exc:
    print("rates:", exc)


# ## Depolarizing shrinks the Bloch vector

# In[4]:

rng = np.random.default_rng(3)
rho = qcore.random_density(("q",), rng)
for p in (0.0, 0.3, 0.75):
    out = channels.depolarizing_channel(rho, "q", p)
    print(p, np.round(out.bloch_vector() / rho.bloch_vector(), 6), 1 - 4 * p / 3)


# ## Small over-rotations add up
#
# N identity gates, each off by eps, leave |1> with probability sin^2(N eps).

# In[5]:

for n in (10, 100, 1000):
    print(n, channels.cumulative_identity_error(n, 1e-3))
