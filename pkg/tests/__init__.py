"""TabBacklog v1 - Test Suite"""
