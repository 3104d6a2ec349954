#: Confidences are clamped to [CONFIDENCE_EPS, 1 - CONFIDENCE_EPS] before
#: the logit
CONFIDENCE_EPS = 1e-7

#: Temperature and Platt scaling fall back to identity below this
MIN_FIT_PAIRS = 2

#: Golden-section search over log T
LOG_TEMPERATURE_BRACKET = (-5.0, 5.0)
LOG_TEMPERATURE_TOLERANCE = 1e-10

#: Calibrator model kinds
IDENTITY = "identity"
TEMPERATURE = "temperature"
PLATT = "platt"
ISOTONIC = "isotonic"

#: Calibrators selectable for a pipeline and the model kind each fits
CALIBRATOR_KINDS = {"ts": TEMPERATURE, "platt": PLATT, "ir": ISOTONIC}

#: Calibration objectives
LAECE0 = "laece0"
DECE = "dece"
OBJECTIVES = (LAECE0, DECE)
DEFAULT_DECE_TAU = 0.5
DEFAULT_DECE_PRE_THRESHOLD = 0.3
