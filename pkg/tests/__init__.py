# EasInnova test suite
