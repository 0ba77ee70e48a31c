# matchlab: matchings in abelian groups and in field extensions F_p ⊂ F_{p^n}
from .abelian import make_group, make_subset
from .ffext import make_field, subspace_from_vectors
from .matching import find_matching, is_locally_matched, kneser_verify
from .linear_matching import basis_matchable, find_matched_basis, is_matched, linear_locally_matched

__version__ = "1.0.0"
