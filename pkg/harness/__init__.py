"""
Monte-Carlo correctness runs, the worked examples and result files.
"""
