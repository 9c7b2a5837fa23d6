# Makes the rewards directory a Python package
