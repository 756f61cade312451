from .corpus import Corpus, CorpusFormatError, dump_corpus, load_corpus
from .distributions import (
    DEFAULT_BOUNDS,
    STANDARD,
    TRIANGULAR_A,
    TRIANGULAR_B,
    UNIFORM2D,
    ViewpointDistribution,
    fixed,
    grid_offsets,
    in_support,
    sample_viewpoint,
    supports_disjoint,
)
from .episodes import (
    INSTRUCTION_DIM,
    encode_instruction,
    make_episode,
    sample_free_pose,
    simplify_path,
)
from .geodesic import (
    DistanceField,
    descend_path,
    distance_field_from,
    geodesic_distance,
)
from .render import (
    BASE_CAMERA_HEIGHT,
    MAX_RANGE,
    N_HEADINGS,
    WALL_HEIGHT,
    heading_unit_vectors,
    render_panorama,
    texture_at,
)
from .types import (
    STANDARD_OFFSET,
    CameraOffset,
    Episode,
    GenerationError,
    PanoObservation,
    Pose,
    SamplingError,
    WorldMap,
)
from .worldgen import connected_fraction, free_cells, generate_world, occupancy
