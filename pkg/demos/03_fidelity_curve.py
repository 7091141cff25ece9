# coding: utf-8

# # When does the code pay off?
#
# With independent flips of probability p on each code qubit, correction
# fails only on two or three flips. For a |0> input the code-word fidelity
# is 2p^3 - 3p^2 + 1. Without encoding it would be 1 - p.

# In[1]:

import numpy as np

from dqec import analysis

ps = np.linspace(0, 1, 11)
for p in ps:
    exact = analysis.exact_pipeline_fidelity(p)
    print(f"p={p:.1f}  coded={exact:.4f}  bare={1 - p:.4f}")


# The two curves meet at the roots of p(2p - 1)(p - 1).

# In[2]:

analysis.theoretical_crossovers()


# ## Sampling
#
# The Monte Carlo sweep draws flip patterns and runs syndrome extraction and
# correction for each trial. Every sweep point gets its own child seed.

# In[3]:

records = analysis.monte_carlo_sweep([0.05, 0.15, 0.3, 0.45, 0.55], 20_000, seed=1)
print(analysis.sweep_csv(records))
print("crossover estimate:", analysis.threshold_check(records))


# ## Through the full protocol
#
# The same thing, but each trial forks the encoded network and runs the
# nine-step distributed decoder. It is slower but lands on the same curve.

# In[4]:

full = analysis.monte_carlo_sweep([0.1, 0.3], 2_000, mode="full_distributed", seed=1)
for r in full:
    print(r.p, round(r.mean_fidelity, 4), "+/-", round(r.std_error, 4), "theory", round(r.theoretical, 4))


# ## Beyond |0>
#
# For a general input, an uncorrected logical flip still overlaps the code
# word, so the curve sits higher.

# In[5]:

spec = analysis.LogicalQubitSpec(0.8, 0.6)
print(analysis.exact_pipeline_fidelity(0.3, spec=spec), analysis.general_fidelity(spec, 0.3))
