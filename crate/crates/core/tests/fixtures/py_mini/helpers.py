DEFAULT_TIMEOUT = 30
NAMES = ["a", "b"]
