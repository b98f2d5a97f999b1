"""CNN trainer for crosswalk manifests.

Consumes the harvesting pipeline's dataset manifest file format and emits
prediction files in the evaluator's ``sample_id<TAB>prob`` format.  Both
formats are treated as frozen external contracts; this package shares no
code with the harvesting pipeline.
"""

__version__ = "0.1.0"
