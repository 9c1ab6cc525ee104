"""Coherence-based diagnostics of quantum chaos for small spin systems.

The package is organised bottom-up:

``linalg``
    validated dense matrices, eigensolver conventions, dephasing, partial traces
``models``
    XXZ chain with a defect (fixed magnetisation sector), TFIM, commuting k-local family
``coherence``
    state-level coherence / delocalisation measures and GOE reference values
``majorization``
    majorization preorder and the eigenstate majorization fraction
``dynamics``
    OTOCs, coherence-generating power, averaged OTOC identities, temporal variance
``rmt``
    GOE/GUE/Haar samplers, level statistics, four-point form factor, short-time growth
``cli``
    batch experiment runner writing deterministic CSV/JSON output
"""

__version__ = "0.1.0"
