# test_models package
