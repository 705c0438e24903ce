"""gapforge: gap-creating clique reduction pipeline over GF(4).

Chains a multicolor-clique to vector-sum reduction, a Hadamard-style
encoding layer, an induced linear CSP, and an FGLSS-style gap graph,
with verification oracles, strong-product amplification, and a
derandomized construction of the encoding schemes.
"""

__version__ = "0.1.0"
