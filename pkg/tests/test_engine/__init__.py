# test_engine package
