"""Model-side adapters for the tracking toolkit: prompt templates per model
family, model-output box parsing into the detection stream format, and a
mask-propagation server speaking the tracker's propagator line protocol.

The bridge talks to the tracker only through its wire formats; it imports no
tracker code, so either side can be swapped independently.
"""

__version__ = "0.1.0"

from .boxparse import ParsedBoxes, parse_model_boxes
from .models import (
    EmptyStubModel,
    PropagationModel,
    TranslateStubModel,
    make_model,
    mask_bounds,
)
from .prompts import PromptFamily, render_prompt
