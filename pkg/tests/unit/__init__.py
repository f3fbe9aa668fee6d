"""TabBacklog v1 - Unit Tests"""
