#this directory should be used as a package