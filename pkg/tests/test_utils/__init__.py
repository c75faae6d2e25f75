# test_utils package
