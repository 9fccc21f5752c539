"""
Synthetic training data from analytic function families
"""
from .families import Curve, FamilySample, draw_family
from .sampling import ElementSample, normalize, sample_to_elements
from .labeling import label_edge_map

__all__ = [
    'Curve',
    'FamilySample',
    'draw_family',
    'ElementSample',
    'normalize',
    'sample_to_elements',
    'label_edge_map',
]
