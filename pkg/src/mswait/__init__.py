"""Waiting-time distributions and conditional cumulative incidence in
progressive multi-stage survival models under right censoring.

The package provides inverse-probability-of-censoring-weighted (IPCW) and
fractional-risk (FRE) estimators, a simulator for multi-stage event
histories, and a Monte Carlo harness that scores estimators by their L1
error against a large-sample oracle.
"""

from .graph import StageGraph, build_graph, load_graph, six_stage_graph, bmt_nine_stage_graph
from .records import Dataset, SubjectRecord, StageVisit, parse_dataset, write_dataset, transition_table, waiting_time
from .stepfun import StepCurve, product_limit, stieltjes_integrate

__version__ = "0.1.0"
