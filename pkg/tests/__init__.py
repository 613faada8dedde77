# Tests for the high-frame-rate speech front-end
