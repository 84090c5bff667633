"""pdsim: lifecycle evaluation of datacenter power-delivery designs.

Evaluates electrical designs by the capacity they can deploy over time
rather than the capacity they install: hierarchical multi-resource
placement with redundancy constraints, arrival/harvest/retirement
lifecycles, a per-component cost model, and a comparative MoE inference
throughput model.
"""

__version__ = "0.1.0"
