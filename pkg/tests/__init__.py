# Main test package
