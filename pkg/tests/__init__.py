# Tests for cuesync
