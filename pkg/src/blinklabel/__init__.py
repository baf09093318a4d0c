"""Millisecond-rate 2D joint labels from blinking-LED markers in
event-camera streams.

The library covers the full loop: a deterministic scene simulator with
ground truth, density clustering of event frames, blink-signature decoding,
optimal LED assignment with tracking, label emission and human-correction
merge, plus evaluation (precision/recall, ablations, motion timing) and a
review service for browser-based correction.
"""

from .cluster import Cluster, centroid, dbscan
from .errors import BlinkLabelError
from .events import (Event, EventArray, EventFrame, EventStream, Polarity,
                     StreamHeader, partition_into_frames, read_event_stream,
                     write_event_stream)
from .evaluate import (LineSpec, PrReport, ablation_run, detect_crossing,
                       precision_recall, timing_error)
from .labels import (Correction, CorrectionSet, LabelFrame, LabelSource,
                     LabelTable, apply_corrections, read_corrections,
                     read_labels, write_corrections, write_labels)
from .leds import LedConfig, default_led_table, load_led_table, save_led_table
from .matching import (Assignment, CostMatrix, TrackState, TrackStatus, Tracker,
                       assign, build_cost_matrix, combined_distance, gate_costs,
                       period_distance, time_distance, track_update)
from .pipeline import (AnnotationResult, PipelineConfig, annotate_stream,
                       apply_ablation)
from .signature import (ClusterSignature, PolaritySequence, estimate_signature,
                        is_outlier, polarity_sequence, smooth)
from .simulate import (Distractor, Edge, GroundTruthLabels, SceneConfig,
                       SinusoidPath, WaypointPath, blink_edges, load_scene,
                       save_scene, simulate)
from .scenarios import SCENARIO_NAMES, build_scenario, scenario_library

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
