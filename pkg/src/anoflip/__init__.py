"""Totally periodic model flows on graph manifolds and their Seifert flips."""
from .assembly import (EquivalenceCertificate, GluedFlow, Gluing, apply_flip, build_flow,
                       certificate_valid, check_transitive, classify, construction_7_3,
                       free_homotopy_compare, orbit_equivalence_search, periodic_itineraries,
                       two_holed_torus_flow, validate_gluing, with_signs)
from .fatgraph import (FatGraph, FatGraphAutomorphism, automorphisms, family_Xn,
                       trace_boundary_faces, two_holed_torus_example, validate_admissible)
from .model_block import BlockField, BlockPoint, classify_face, closed_orbits
from .numerics import block_transit, cone_expansion, integrate_orbit, verify_block_properties
from .orbit_combinatorics import is_tree_of_scalloped, scalloped_lines_through, unfold_tree
from .seifert_piece import SeifertPiece, build_piece, flip_piece

__version__ = "0.1.0"
