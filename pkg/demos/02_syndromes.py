# coding: utf-8

# # Syndromes, stabilizers and aliasing
#
# Two parity checks, ZZI and ZIZ, separate the four weight-0/1 flips. With
# two or more flips the readout points at the wrong qubit.

# In[1]:

from dqec.channels import ALL_PATTERNS, apply_error_pattern
from dqec.protocol import (
    CODE_LABELS,
    CodeBasis,
    LogicalQubitSpec,
    StabilizerPair,
    correction_from_syndrome,
    stabilizer_eigenvalues,
    syndrome_extract,
)

spec = LogicalQubitSpec(0.6, 0.8j)
word = spec.code_word()
pair = StabilizerPair.for_basis(CodeBasis.BITFLIP)


# In[2]:

for pattern in ALL_PATTERNS:
    noisy = apply_error_pattern(word, pattern, CODE_LABELS)
    syndrome, _ = syndrome_extract(noisy)
    eig = stabilizer_eigenvalues(noisy, pair)
    fix = correction_from_syndrome(syndrome)
    print(pattern, syndrome, eig, fix or "-")


# X on qubit 2 gives (-1, +1) and X on qubit 3 gives (+1, -1). The two are
# distinct, and that is why the lookup works at all.

# ## Phase flips
#
# Hadamards on all three qubits swap the roles of X and Z, so the same
# table carries over to Z errors checked by XXI and XIX.

# In[3]:

pf = CodeBasis.PHASEFLIP
word = spec.code_word(pf)
pair = StabilizerPair.for_basis(pf)
for s in ("III", "ZII", "IZI", "IIZ"):
    noisy = apply_error_pattern(word, s, CODE_LABELS)
    print(s, syndrome_extract(noisy, basis=pf)[0], stabilizer_eigenvalues(noisy, pair))
