"""Interactive highway co-driving simulator.

An automated ego vehicle plans against probabilistic cut-in predictions for
the surrounding traffic; a human can point at a vehicle (gaze proxy) and
inject a certain cut-in prediction, which the planner treats like any other
prediction input. The package ships a deterministic headless harness, three
demonstration scenarios, and a WebSocket bridge for the browser interface.
"""

from .gaze import (AmbiguousDirection, BearingError, CameraModel, GazeRay,
                   NoSelectableVehicle, OutOfScreen, bearing_error,
                   camera_for_ego, infer_direction, screen_to_ray,
                   select_vehicle)
from .harness import (RunMetrics, ScriptEntry, ScriptVehicleUnknown, compare,
                      load_scenario_file, load_script, run)
from .intervention import (InterventionRecord, InvalidDirection,
                           VehicleNotRelevant, apply_overrides, expire,
                           inject)
from .planner import (AccelProfile, CandidateTrajectory, CostBreakdown,
                      ManeuverPlan, RolloutTrace, optimize_trajectory,
                      rollout, select_behavior, trajectory_cost)
from .prediction import (BehaviorLabel, ConditionalPrediction, EgoBehavior,
                         SceneComposition, enumerate_compositions,
                         high_probability_flags, predict_scene,
                         predict_vehicle)
from .scenario import (ParseError, PlannerParams, PredictionParams,
                       ScenarioConfig, ValidationError, load_scenario)
from .simloop import SimulationLoop, TickRecord
from .world import (DEFAULT_IDM, IDMParams, RoadModel, SceneState,
                    VehicleState, idm_accel, net_gap, relevant_vehicles,
                    step_world, world_y)

__version__ = "0.1.0"
