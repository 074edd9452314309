"""Question templates and training-stage prompt strings.

The stage post-prompts are byte-exact fixtures: the prompt tests and the
response parser both assert on them verbatim, so edit with care. Question
templates carry `{placeholders}` filled by the generators; multiple-choice
questions additionally get a lettered options block appended at prompt
assembly so "answer with the option's letter" has a defined mapping.
"""

COUNTING = "How many {category}(s) appear?"

ABS_DISTANCE_CLOSEST = (
    "Measuring from the closest point of each object, what is the distance "
    "between the {a} and the {b} (in meters)?"
)
ABS_DISTANCE_CENTROID = (
    "Measuring from the center of each object, what is the distance "
    "between the {a} and the {b} (in meters)?"
)

OBJECT_SIZE = (
    "What is the length of the longest dimension (length, width, or height) "
    "of the {category}, measured in centimeters?"
)

ROOM_SIZE = "What is the size of this room (in square meters)?"

REL_DISTANCE_CLOSEST = (
    "Measuring from the closest point of each object, which of these two "
    "objects ({a}, {b}) is closer to the {category}?"
)
REL_DISTANCE_CENTROID = (
    "Measuring from the center of each object, which of these two "
    "objects ({a}, {b}) is closer to the {category}?"
)

REL_DIRECTION_SINGLE = (
    "From the camera's perspective, is the {a} to the {b}'s "
    "{c1}, {c2}, {c3} or {c4}?"
)
REL_DIRECTION_MULTI = (
    "If I am standing by the {positioning} and facing the {orienting}, is the "
    "{querying} to my {c1}, {c2}, {c3} or {c4}? The directions refer to the "
    "quadrants of a Cartesian plane (if I am standing at the origin and facing "
    "along the positive y-axis)?"
)

APPEARANCE_ORDER = (
    "What will be the first-time appearance order of the following categories "
    "in the video: {c1}, {c2}, {c3}, {c4}?"
)

LOCALIZATION_SUFFIX = (
    "Please carefully observe the image first to identify the object(s) "
    "referred to in the question. Note that each object type appears only once "
    "in the image. Then provide the 2D bounding box coordinates and labels of "
    "the related objects in JSON format."
)

SYSTEM_PROMPT = "You are a helpful assistant."

STAGE2_POST_MCQ = (
    "Please answer with the option's letter from the given choices "
    "(e.g., A, B, etc.) directly."
)
STAGE2_POST_NQ = (
    "Please answer the question using a numerical value (e.g., 42 or 3.1) "
    "directly."
)

STAGE3_THINK = (
    "Please think about this question as if you were a human pondering deeply. "
    "Engage in an internal dialogue using expressions such as 'let me think', "
    "'wait', 'Hmm', 'oh, I see', 'let's break it down', etc, or other natural "
    "language thought expressions. It's encouraged to include self-reflection "
    "or verification in the reasoning process."
)
STAGE3_POST_MCQ = (
    "Please provide your detailed reasoning between the <think> </think> tags, "
    "and then answer the question with the option's letter from the given "
    "choices (e.g., A, B, etc.) within the <answer> </answer> tags."
)
STAGE3_POST_NQ = (
    "Please provide your detailed reasoning between the <think> </think> tags, "
    "and then answer the question with a numerical value (e.g., 42 or 3.1) "
    "within the <answer> </answer> tags."
)
