"""Shared index tables and conventions for the geometry kernels.

Coordinate convention: image coordinates, origin top-left, y increases
downward. "Above" therefore means smaller y. All angles are interior
planar angles in radians, clamped to [0, pi].

Skeleton layout is the 18-joint COCO body model:

    0 nose      1 neck      2 r_shoulder  3 r_elbow   4 r_wrist
    5 l_shoulder 6 l_elbow  7 l_wrist     8 r_hip     9 r_knee
    10 r_ankle  11 l_hip    12 l_knee     13 l_ankle  14 r_eye
    15 l_eye    16 r_ear    17 l_ear

Feature vector layout (one float per slot, plus a validity flag):

    0 r_elbow          interior angle shoulder-elbow-wrist
    1 l_elbow
    2 r_shoulder_elev  upper-arm vector vs. torso-down reference
    3 l_shoulder_elev
    4 torso_incline    neck->mid-hip vector vs. image vertical
    5 r_wrist_above_head  boolean stored as 0.0/1.0 (wrist.y < nose.y)
    6 l_wrist_above_head
    7 r_arm_extent     |wrist - shoulder| in normalized units
    8 l_arm_extent
    9 torso_len        |mid-hip - neck| in normalized units

Slots 0-4 are angles, 5-6 booleans, 7-9 lengths. The torso-down
reference for shoulder elevation is the neck->mid-hip direction when at
least one hip is visible, else straight image-down (0, +1); the fallback
keeps arm features usable in the common upper-body-only camera framing.
"""

NOSE = 0
NECK = 1
R_SHOULDER = 2
R_ELBOW = 3
R_WRIST = 4
L_SHOULDER = 5
L_ELBOW = 6
L_WRIST = 7
R_HIP = 8
R_KNEE = 9
R_ANKLE = 10
L_HIP = 11
L_KNEE = 12
L_ANKLE = 13
R_EYE = 14
L_EYE = 15
R_EAR = 16
L_EAR = 17

N_JOINTS = 18

JOINT_NAMES = (
    "nose", "neck", "r_shoulder", "r_elbow", "r_wrist",
    "l_shoulder", "l_elbow", "l_wrist", "r_hip", "r_knee",
    "r_ankle", "l_hip", "l_knee", "l_ankle", "r_eye",
    "l_eye", "r_ear", "l_ear",
)

# Left/right counterpart of each joint index (fixed points map to themselves).
MIRROR_MAP = (0, 1, 5, 6, 7, 2, 3, 4, 11, 12, 13, 8, 9, 10, 15, 14, 17, 16)

F_R_ELBOW = 0
F_L_ELBOW = 1
F_R_SHOULDER_ELEV = 2
F_L_SHOULDER_ELEV = 3
F_TORSO_INCLINE = 4
F_R_WRIST_ABOVE_HEAD = 5
F_L_WRIST_ABOVE_HEAD = 6
F_R_ARM_EXTENT = 7
F_L_ARM_EXTENT = 8
F_TORSO_LEN = 9

N_FEATURES = 10

FEATURE_NAMES = (
    "r_elbow", "l_elbow", "r_shoulder_elev", "l_shoulder_elev",
    "torso_incline", "r_wrist_above_head", "l_wrist_above_head",
    "r_arm_extent", "l_arm_extent", "torso_len",
)

ANGLE_FEATURES = (F_R_ELBOW, F_L_ELBOW, F_R_SHOULDER_ELEV,
                  F_L_SHOULDER_ELEV, F_TORSO_INCLINE)
BOOL_FEATURES = (F_R_WRIST_ABOVE_HEAD, F_L_WRIST_ABOVE_HEAD)

# Left/right counterpart of each feature slot.
FEATURE_MIRROR_MAP = (1, 0, 3, 2, 4, 6, 5, 8, 7, 9)

# Scale source codes emitted by normalize kernels.
SCALE_NONE = 0
SCALE_HIPS = 1
SCALE_SHOULDERS = 2

# Bones shorter than this (normalized units) are treated as degenerate:
# the dependent angle becomes invalid instead of producing NaN.
EPS_BONE = 1e-9
