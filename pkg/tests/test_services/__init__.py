# test_services package
